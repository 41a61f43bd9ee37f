#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdigest/analysis.hpp"
#include "tdigest/datagen.hpp"
#include "tdigest/digest.hpp"
#include "tdigest/scale.hpp"

namespace {

using json = nlohmann::json;
using namespace tdigest;

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

ScaleKind parse_scale(const std::string& s) {
    if (s == "k0") return ScaleKind::K0;
    if (s == "k1") return ScaleKind::K1;
    if (s == "k2") return ScaleKind::K2;
    if (s == "k3") return ScaleKind::K3;
    throw CLI::ValidationError("--scale", "unknown scale function: " + s);
}

ScaleSpec make_spec(const std::string& scale, double delta, const std::string& normalizer) {
    ScaleSpec spec;
    spec.kind = parse_scale(scale);
    spec.delta = delta;
    const bool tail_kind = spec.kind == ScaleKind::K2 || spec.kind == ScaleKind::K3;
    if (normalizer.empty()) {
        // k2/k3 default to the growth-compensating paper normalizer
        spec.policy = tail_kind ? (spec.kind == ScaleKind::K2 ? NormalizerPolicy::PaperK2
                                                              : NormalizerPolicy::PaperK3)
                                : NormalizerPolicy::Constant;
        spec.z = 1.0;
    } else if (normalizer == "paper") {
        spec.policy = spec.kind == ScaleKind::K3 ? NormalizerPolicy::PaperK3
                                                 : NormalizerPolicy::PaperK2;
    } else if (normalizer.rfind("const:", 0) == 0) {
        spec.policy = NormalizerPolicy::Constant;
        try {
            spec.z = std::stod(normalizer.substr(6));
        } catch (const std::exception&) {
            throw std::invalid_argument("bad normalizer constant: " + normalizer);
        }
    } else {
        throw std::invalid_argument("normalizer must be 'paper' or 'const:<z>'");
    }
    validate_spec(spec);
    return spec;
}

std::vector<double> read_samples(std::istream& in, const std::string& name) {
    std::vector<double> samples;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto begin = line.find_first_not_of(" \t\r");
        if (begin == std::string::npos) {
            continue;  // blank line
        }
        const auto end = line.find_last_not_of(" \t\r");
        const std::string token = line.substr(begin, end - begin + 1);
        char* parse_end = nullptr;
        const double v = std::strtod(token.c_str(), &parse_end);
        if (parse_end != token.c_str() + token.size() || !std::isfinite(v)) {
            throw io_error(name + ":" + std::to_string(lineno) +
                           ": not a decimal sample: '" + token + "'");
        }
        samples.push_back(v);
    }
    return samples;
}

std::vector<double> parse_csv_doubles(const std::string& csv, const char* what) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
            out.push_back(v);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("bad ") + what + " value: '" + item + "'");
        }
    }
    if (out.empty()) {
        throw std::invalid_argument(std::string("empty ") + what + " list");
    }
    return out;
}

TDigest load_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open digest file: " + path);
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return TDigest::deserialize(bytes);
}

void write_file(const std::string& path, const std::string& content, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) {
        throw io_error("cannot open output file: " + path);
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw io_error("write failed: " + path);
    }
}

json normalizer_json(const ScaleSpec& spec) {
    if (spec.policy == NormalizerPolicy::Constant) {
        return {{"policy", "const"}, {"z", spec.z}};
    }
    return {{"policy", to_string(spec.policy)}};
}

json report_json(const BoundReport& r) {
    json violations = json::array();
    for (const auto& v : r.max_weight_violations) {
        violations.push_back(
            {{"index", v.index}, {"weight", v.weight}, {"bound", v.bound}, {"q_worst", v.q_worst}});
    }
    json ksize = json::array();
    for (const auto& v : r.ksize_violations) {
        ksize.push_back({{"index", v.index}, {"k_size", v.k_size}});
    }
    return {{"scale", to_string(r.spec.kind)},
            {"delta", r.spec.delta},
            {"normalizer", normalizer_json(r.spec)},
            {"n", r.n},
            {"centroid_count", r.centroid_count},
            {"count_lower", r.count_bounds.lower},
            {"count_upper", r.count_bounds.upper},
            {"count_ok", r.count_ok},
            {"max_weight", r.max_weight},
            {"max_weight_violations", violations},
            {"ksize_violations", ksize},
            {"all_ok", r.all_ok}};
}

struct Options {
    std::string scale;  // empty = per-command default
    double delta = 100.0;
    std::string normalizer;
    std::string input;
    std::string output;
    std::string dist;
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    std::uint64_t buffer = 0;
    std::string quantiles;
    std::string values;
};

int cmd_build(const Options& opt) {
    const ScaleSpec spec =
        make_spec(opt.scale.empty() ? "k1" : opt.scale, opt.delta, opt.normalizer);
    std::vector<double> samples;
    if (!opt.input.empty() && !opt.dist.empty()) {
        throw std::invalid_argument("give either --input or --dist, not both");
    }
    if (!opt.input.empty()) {
        if (opt.input == "-") {
            samples = read_samples(std::cin, "<stdin>");
        } else {
            std::ifstream in(opt.input);
            if (!in) {
                throw io_error("cannot open input file: " + opt.input);
            }
            samples = read_samples(in, opt.input);
        }
    } else if (!opt.dist.empty()) {
        if (opt.n == 0) {
            throw std::invalid_argument("--dist requires --n >= 1");
        }
        samples = generate(parse_distribution(opt.dist), opt.n, opt.seed);
    } else {
        throw std::invalid_argument("build needs a sample source: --input or --dist");
    }

    TDigest d = opt.buffer > 0 ? TDigest(spec, opt.buffer) : TDigest(spec);
    for (double x : samples) {
        d.insert(x);
    }
    d.compress();
    const auto bytes = d.serialize();
    const std::string blob(bytes.begin(), bytes.end());
    if (opt.output.empty() || opt.output == "-") {
        std::cout.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    } else {
        write_file(opt.output, blob, true);
    }
    std::cerr << "built digest: " << d.centroids().size() << " centroids, n="
              << d.total_weight() << "\n";
    return kExitOk;
}

int cmd_quantile(const Options& opt) {
    TDigest d = load_digest(opt.input);
    for (double q : parse_csv_doubles(opt.quantiles, "quantile")) {
        std::cout << d.quantile(q) << "\n";
    }
    return kExitOk;
}

int cmd_cdf(const Options& opt) {
    TDigest d = load_digest(opt.input);
    for (double x : parse_csv_doubles(opt.values, "cdf")) {
        std::cout << d.cdf(x) << "\n";
    }
    return kExitOk;
}

int cmd_verify(const Options& opt) {
    TDigest d = load_digest(opt.input);
    const BoundReport report = verify_digest(d);
    const std::string text = report_json(report).dump(2) + "\n";
    if (opt.output.empty() || opt.output == "-") {
        std::cout << text;
    } else {
        write_file(opt.output, text, false);
    }
    return report.all_ok ? kExitOk : kExitVerifyFailed;
}

int cmd_sweep(const Options& opt, const CLI::App& cmd) {
    // defaults reproduce the k2/k3 bounded-size verification grid
    std::vector<double> deltas = {50.0, 100.0};
    std::vector<ScaleKind> kinds = {ScaleKind::K2, ScaleKind::K3};
    std::vector<Distribution> dists = {Distribution::Uniform, Distribution::Normal,
                                       Distribution::Sequential, Distribution::Reversed,
                                       Distribution::Clustered};
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::vector<double> ratios = {10.0, 100.0, 1000.0, 10000.0};

    if (!opt.scale.empty()) {
        kinds = {parse_scale(opt.scale)};
    }
    if (cmd.count("--delta") > 0) {
        deltas = {opt.delta};
    }
    if (!opt.dist.empty()) {
        dists = {parse_distribution(opt.dist)};
    }
    if (opt.seed != 0) {
        seeds = {opt.seed};
    }

    std::vector<ScaleSpec> specs;
    std::vector<std::uint64_t> ns;
    for (double delta : deltas) {
        for (ScaleKind kind : kinds) {
            specs.push_back(make_spec(to_string(kind), delta, opt.normalizer));
        }
        for (double r : ratios) {
            ns.push_back(static_cast<std::uint64_t>(delta * r));
        }
    }
    std::sort(ns.begin(), ns.end());
    ns.erase(std::unique(ns.begin(), ns.end()), ns.end());
    if (opt.n > 0) {
        ns = {opt.n};
    }

    const auto rows = sweep(specs, ns, dists, seeds);
    std::ostringstream csv;
    write_sweep_csv(csv, rows);
    if (opt.output.empty() || opt.output == "-") {
        std::cout << csv.str();
    } else {
        write_file(opt.output, csv.str(), false);
    }
    return kExitOk;
}

int cmd_dump(const Options& opt) {
    TDigest d = load_digest(opt.input);
    const double n = d.total_weight();
    std::cout << "mean,weight,q_left,q_right,k_size\n";
    double w_before = 0.0;
    const auto cs = d.centroids();
    for (std::size_t i = 0; i < cs.size(); ++i) {
        const double q_left = w_before / n;
        const double q_right = (w_before + cs[i].weight) / n;
        std::cout << cs[i].mean << ',' << cs[i].weight << ',' << q_left << ','
                  << q_right << ',' << d.k_size(i) << '\n';
        w_before += cs[i].weight;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    std::cout << std::setprecision(17);
    CLI::App app{"t-digest builder and size-bound verifier"};
    app.require_subcommand(1);
    Options opt;

    const auto add_spec_flags = [&](CLI::App* cmd) {
        cmd->add_option("--scale", opt.scale, "scale function: k0|k1|k2|k3");
        cmd->add_option("--delta", opt.delta, "compression parameter (>= 2)");
        cmd->add_option("--normalizer", opt.normalizer, "'paper' or 'const:<z>'");
    };

    auto* build = app.add_subcommand("build", "build a digest from samples");
    add_spec_flags(build);
    build->add_option("--input", opt.input, "newline-delimited samples, '-' for stdin");
    build->add_option("--output", opt.output, "digest file to write");
    build->add_option("--dist", opt.dist, "generate samples: uniform|normal|sequential|reversed|clustered");
    build->add_option("--n", opt.n, "number of generated samples");
    build->add_option("--seed", opt.seed, "generator seed");
    build->add_option("--buffer", opt.buffer, "ingest buffer capacity (default 10*delta)");

    auto* quantile = app.add_subcommand("quantile", "evaluate quantiles of a digest");
    quantile->add_option("--input", opt.input, "digest file")->required();
    quantile->add_option("--quantiles", opt.quantiles, "comma-separated q list")->required();

    auto* cdf = app.add_subcommand("cdf", "evaluate the CDF of a digest");
    cdf->add_option("--input", opt.input, "digest file")->required();
    cdf->add_option("--values", opt.values, "comma-separated x list")->required();

    auto* verify = app.add_subcommand("verify", "check a digest against the size bounds");
    verify->add_option("--input", opt.input, "digest file")->required();
    verify->add_option("--output", opt.output, "report file (default stdout)");

    auto* sweep_cmd = app.add_subcommand("sweep", "run a verification grid, emit CSV");
    add_spec_flags(sweep_cmd);
    sweep_cmd->add_option("--dist", opt.dist, "restrict to one distribution");
    sweep_cmd->add_option("--n", opt.n, "restrict to one stream size");
    sweep_cmd->add_option("--seed", opt.seed, "restrict to one seed");
    sweep_cmd->add_option("--output", opt.output, "CSV file (default stdout)");

    auto* dump = app.add_subcommand("dump", "print centroids as CSV");
    dump->add_option("--input", opt.input, "digest file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    }

    try {
        if (build->parsed()) return cmd_build(opt);
        if (quantile->parsed()) return cmd_quantile(opt);
        if (cdf->parsed()) return cmd_cdf(opt);
        if (verify->parsed()) return cmd_verify(opt);
        if (sweep_cmd->parsed()) return cmd_sweep(opt, *sweep_cmd);
        if (dump->parsed()) return cmd_dump(opt);
        std::cerr << "no subcommand given\n";
        return kExitUsage;
    } catch (const io_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const deserialize_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}
