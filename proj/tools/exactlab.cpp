// exactlab: command-line runner for the exact-learning experiments.
//
//   exactlab <command> [--config file.json] [--seed N] [--out DIR] [--threads N] ...
//
// Every run writes DIR/manifest.json before any result, then its CSV/JSONL
// outputs, then rewrites the manifest with end time and SHA-256 digests.
// Failures leave DIR/error.json and a nonzero exit status.

#include "exactlab/disagreement.hpp"
#include "exactlab/dynamics.hpp"
#include "exactlab/errors.hpp"
#include "exactlab/hypercube.hpp"
#include "exactlab/learners.hpp"
#include "exactlab/logic.hpp"
#include "exactlab/maxmargin.hpp"
#include "exactlab/parallel.hpp"
#include "exactlab/random.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace exactlab;

namespace {

constexpr int kExitError = 1;
constexpr int kExitCertification = 2;

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string num(std::uint64_t v) { return std::to_string(v); }

std::string rational(const Rational& r) { return r.str(); }

std::string utc_now() {
    const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string sha256_hex(const std::string& data) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr);
    std::string hex;
    char b[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(b, sizeof b, "%02x", md[i]);
        hex += b;
    }
    return hex;
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("io_error", "cannot write " + path.string());
    f << content;
    if (!f) throw Error("io_error", "write failed for " + path.string());
}

std::string read_file(const fs::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : width_(header.size()) { row(header); }

    void row(const std::vector<std::string>& cells) {
        if (cells.size() != width_) throw std::logic_error("csv row width mismatch");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }

    const std::string& str() const { return text_; }

private:
    std::size_t width_;
    std::string text_;
};

// Run context: output directory, manifest, produced files.
class Run {
public:
    Run(std::string command, json config)
        : command_(std::move(command)), config_(std::move(config)), dir_(config_.at("out").get<std::string>()) {
        fs::create_directories(dir_);
        manifest_ = {{"command", command_},
                     {"config", config_},
                     {"seed", config_.contains("seed") ? config_.at("seed") : json(nullptr)},
                     {"version", EXACTLAB_VERSION},
                     {"start_time", utc_now()},
                     {"end_time", nullptr},
                     {"status", "running"},
                     {"outputs", json::object()}};
        flush_manifest();
    }

    const json& config() const { return config_; }
    std::size_t threads() const {
        const auto t = config_.at("threads").get<std::size_t>();
        return t == 0 ? default_threads() : t;
    }

    void emit(const std::string& name, const std::string& content) {
        write_file(dir_ / name, content);
        manifest_["outputs"][name] = {{"sha256", sha256_hex(content)}, {"bytes", content.size()}};
    }

    void fail_certification(const std::string& what) { failures_.push_back(what); }
    bool certified() const { return failures_.empty(); }

    void finish() {
        manifest_["end_time"] = utc_now();
        manifest_["status"] = certified() ? "ok" : "certification_failed";
        if (!certified()) manifest_["certification_failures"] = failures_;
        flush_manifest();
    }

    void abort(const Error& e) {
        const json err = {{"command", command_}, {"kind", e.kind()}, {"message", e.what()}};
        write_file(dir_ / "error.json", err.dump(2) + "\n");
        manifest_["end_time"] = utc_now();
        manifest_["status"] = "failed";
        manifest_["error"] = err;
        flush_manifest();
    }

private:
    void flush_manifest() { write_file(dir_ / "manifest.json", manifest_.dump(2) + "\n"); }

    std::string command_;
    json config_;
    fs::path dir_;
    json manifest_;
    std::vector<std::string> failures_;
};

json iota_list(std::size_t lo, std::size_t hi) {
    json a = json::array();
    for (std::size_t i = lo; i <= hi; ++i) a.push_back(i);
    return a;
}

// Schema: every accepted key with its default; the default's JSON type is the
// required type.
json schema_for(const std::string& cmd) {
    json s = {{"seed", 0u}, {"out", "exactlab_out/" + cmd}, {"threads", 1u}};
    if (cmd == "disagreement") {
        s["m"] = iota_list(1, 7);
        s["samples"] = 100000u;
        s["monte_carlo"] = true;
    } else if (cmd == "critical-n") {
        s["d"] = 3u;
        s["m"] = iota_list(1, 5);
        s["group"] = "flip_block_swap";
        s["group_cap"] = 100000u;
    } else if (cmd == "teach") {
        s["d"] = 6u;
        s["count"] = 100u;
        s["max_weight"] = 5u;
        s["tight_tol"] = 1e-6;
    } else if (cmd == "flow") {
        s["m"] = iota_list(2, 5);
        s["t_max"] = 1e6;
        s["t_first"] = 1e-2;
        s["checkpoints_per_decade"] = 64u;
        s["abs_tol"] = 1e-9;
        s["rel_tol"] = 1e-7;
        s["monotone_tol"] = 1e-8;
    } else if (cmd == "margin-n") {
        s["m"] = iota_list(2, 4);
        s["seeds"] = 20u;
        s["n_grid"] = json::array();
        s["max_n"] = 4096u;
        s["seed"] = 7u;
    } else if (cmd == "logic-gen") {
        const logic::GeneratorConfig g;
        s["count"] = 10000u;
        s["recipes"] = {"RP", "LP"};
        s["min_predicates"] = g.min_predicates;
        s["max_predicates"] = g.max_predicates;
        s["min_rules"] = g.min_rules;
        s["max_rules"] = g.max_rules;
        s["min_body"] = g.min_body;
        s["max_body"] = g.max_body;
        s["max_depth"] = g.max_depth;
        s["yes_probability"] = g.yes_probability;
        s["depth_quota"] = g.depth_quota;
        s["max_retries"] = g.max_retries;
        s["style"] = "with_reasoning";
    } else if (cmd == "logic-verify") {
        s["dataset"] = "";
        s["answers"] = "";
    } else if (cmd == "failure-prob") {
        s["d"] = 3u;
        s["trials"] = 10000u;
        s["n"] = iota_list(1, 8);
        json names = json::array();
        for (const auto& l : builtin_learners()) names.push_back(l.name());
        s["learners"] = names;
    } else {
        throw ConfigError("unknown command '" + cmd + "'");
    }
    return s;
}

bool same_type(const json& expected, const json& value) {
    if (expected.is_number_unsigned()) return value.is_number_unsigned();
    if (expected.is_number_float()) return value.is_number();
    if (expected.is_array()) {
        if (!value.is_array()) return false;
        if (expected.empty()) return std::all_of(value.begin(), value.end(), [](const json& v) {
            return v.is_number_unsigned();
        });
        return std::all_of(value.begin(), value.end(), [&](const json& v) { return same_type(expected.front(), v); });
    }
    return expected.type() == value.type();
}

void apply(json& config, const std::string& key, const json& value, const std::string& origin) {
    if (!config.contains(key)) throw ConfigError(origin + ": unknown key '" + key + "'");
    if (!same_type(config[key], value))
        throw ConfigError(origin + ": key '" + key + "' expects " + std::string(config[key].type_name()) +
                          (config[key].is_array() ? " of non-negative integers or strings as in the default" : ""));
    config[key] = config[key].is_number_float() ? json(value.get<double>()) : value;
}

struct Flags {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    std::optional<std::size_t> threads, d, trials, count;
    std::vector<std::size_t> m, n_grid;
};

json resolve_config(const std::string& cmd, const Flags& flags) {
    json config = schema_for(cmd);
    if (!flags.config_path.empty()) {
        json file;
        try {
            file = json::parse(read_file(flags.config_path));
        } catch (const json::parse_error& e) {
            throw ConfigError("config is not valid JSON: " + std::string(e.what()));
        }
        if (!file.is_object()) throw ConfigError("config must be a JSON object");
        for (const auto& [k, v] : file.items()) apply(config, k, v, flags.config_path);
    }
    if (flags.seed) apply(config, "seed", *flags.seed, "--seed");
    if (flags.out) apply(config, "out", *flags.out, "--out");
    if (flags.threads) apply(config, "threads", *flags.threads, "--threads");
    if (flags.d) apply(config, "d", *flags.d, "--d");
    if (flags.trials) apply(config, "trials", *flags.trials, "--trials");
    if (flags.count) apply(config, "count", *flags.count, "--count");
    if (!flags.m.empty()) apply(config, "m", flags.m, "--m");
    if (!flags.n_grid.empty()) apply(config, cmd == "failure-prob" ? "n" : "n_grid", flags.n_grid, "--n-grid");
    return config;
}

template <class T>
T get(const json& c, const char* key) {
    return c.at(key).get<T>();
}

// ---------------------------------------------------------------- commands

void cmd_disagreement(Run& run) {
    const auto& c = run.config();
    const auto seed = get<std::uint64_t>(c, "seed");
    const auto samples = get<std::uint64_t>(c, "samples");
    Csv csv({"pair", "m", "d", "method", "samples", "probability", "exact", "halfwidth", "closed_form"});
    for (const auto m : get<std::vector<std::size_t>>(c, "m")) {
        if (m == 0) throw ConfigError("m must be >= 1");
        const std::size_t d = 2 * m;
        const auto geq = build_named(NamedHypothesis::geq_compare(m));
        const auto gt = build_named(NamedHypothesis::gt_compare(m));
        const auto dist = InputDistribution::uniform(d);
        const std::string closed = "1/" + std::to_string(std::uint64_t{1} << m);
        const bool enumerable = d <= kDefaultEnumerationCap;
        EnumerationOptions opt{kDefaultEnumerationCap, run.threads()};
        if (enumerable) {
            const auto r = disagreement_prob(geq, gt, dist, EstimationMode::Exact, 0, 0, opt);
            const std::string exact = rational(*r.exact);
            if (exact != closed) run.fail_certification("geq_vs_gt m=" + std::to_string(m) + " gave " + exact);
            csv.row({"geq_vs_gt", num(m), num(d), "exact", "0", num(r.probability), exact, "0", closed});
            const auto self = disagreement_prob(geq, geq, dist, EstimationMode::Exact, 0, 0, opt);
            csv.row({"geq_vs_geq", num(m), num(d), "exact", "0", num(self.probability), rational(*self.exact), "0",
                     "0"});
        }
        if (get<bool>(c, "monte_carlo") && samples > 0) {
            const auto r =
                disagreement_prob(geq, gt, dist, EstimationMode::MonteCarlo, samples, derive_seed(seed, m), opt);
            csv.row({"geq_vs_gt", num(m), num(d), "monte_carlo", num(samples), num(r.probability), "",
                     num(r.confidence_halfwidth), closed});
        }
    }
    run.emit("disagreement.csv", csv.str());
}

void cmd_critical_n(Run& run) {
    const auto& c = run.config();
    Csv csv({"family", "d", "group", "elements", "stabilizer", "min_disagreement", "critical_n", "partial"});

    const auto d = get<std::size_t>(c, "d");
    if (d == 0) throw ConfigError("d must be >= 1");
    const auto f0 = build_named(NamedHypothesis::all_zero(d));
    const auto f1 = build_named(NamedHypothesis::origin_indicator(d));
    const auto dist = InputDistribution::uniform(d);
    const auto p = disagreement_prob(f0, f1, dist);
    const std::vector<Rational> pair{*p.exact};
    csv.row({"f0_f1", num(d), "pairwise", "2", "0", rational(*p.exact), critical_sample_size(pair).to_string(), "0"});
    csv.row({"single", num(d), "pairwise", "1", "0", "", critical_sample_size(std::span<const Rational>{}).to_string(),
             "0"});

    const auto group = get<std::string>(c, "group");
    if (group != "flip_block_swap" && group != "flip_symmetric")
        throw ConfigError("group must be flip_block_swap or flip_symmetric");
    for (const auto m : get<std::vector<std::size_t>>(c, "m")) {
        if (m == 0) throw ConfigError("m must be >= 1");
        const std::size_t dm = 2 * m;
        const auto geq = build_named(NamedHypothesis::geq_compare(m));
        const auto udist = InputDistribution::uniform(dm);
        const auto gt = build_named(NamedHypothesis::gt_compare(m));
        const std::vector<Rational> q{*disagreement_prob(geq, gt, udist).exact};
        csv.row({"geq_gt", num(dm), "pairwise", "2", "0", rational(q[0]), critical_sample_size(q).to_string(), "0"});

        std::vector<SymmetryAction> gens{SymmetryAction::flip(dm)};
        if (group == "flip_block_swap") {
            gens.push_back(SymmetryAction::block_swap(m));
        } else {
            if (dm >= 2) gens.push_back(SymmetryAction::transposition(dm, 0, 1));
            gens.push_back(SymmetryAction::cycle(dm));
        }
        OrbitOptions opt;
        opt.cap = get<std::size_t>(c, "group_cap");
        opt.allow_partial = true;
        opt.enumeration.threads = run.threads();
        const auto b = orbit_critical_sample_size(geq, gens, udist, opt);
        csv.row({"geq_orbit", num(dm), group, num(b.elements_examined), num(b.stabilizer_elements),
                 b.min_disagreement ? rational(*b.min_disagreement) : "", b.size.to_string(), b.partial ? "1" : "0"});
    }
    run.emit("critical_n.csv", csv.str());
}

void cmd_teach(Run& run) {
    const auto& c = run.config();
    const auto d = get<std::size_t>(c, "d");
    const auto count = get<std::size_t>(c, "count");
    const auto seed = get<std::uint64_t>(c, "seed");
    const auto max_weight = static_cast<long long>(get<std::uint64_t>(c, "max_weight"));
    TeachingSetOptions opt;
    opt.tight_tol = get<double>(c, "tight_tol");
    if (d == 0) throw ConfigError("d must be >= 1");

    struct Item {
        LinearThreshold target;
        std::optional<TeachingSet> set;
        std::string error;
    };
    std::vector<Item> items(count);
    parallel_for(count, run.threads(), [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            Rng rng = make_rng(seed, i);
            items[i].target = random_separable_target(d, rng, max_weight);
            try {
                items[i].set = teaching_set(items[i].target, d, opt);
            } catch (const CertificationFailure& e) {
                items[i].error = e.what();
            }
        }
    });

    const std::size_t bound = 2 * d + 2;
    Csv rows({"index", "d", "target", "size", "bound", "certified", "differences_used", "weight_relative_error"});
    std::size_t certified = 0, max_size = 0;
    for (std::size_t i = 0; i < count; ++i) {
        const auto& it = items[i];
        const std::string target = "\"" + it.target.to_string() + "\"";
        if (!it.set) {
            rows.row({num(i), num(d), target, "", num(bound), "0", "", ""});
            run.fail_certification("target " + std::to_string(i) + ": " + it.error);
            continue;
        }
        const auto& s = *it.set;
        const bool ok = s.certified && s.examples.size() <= bound;
        certified += ok;
        max_size = std::max(max_size, s.examples.size());
        if (!ok) run.fail_certification("target " + std::to_string(i) + " not certified within size bound");
        rows.row({num(i), num(d), target, num(s.examples.size()), num(bound), ok ? "1" : "0",
                  num(s.differences_used), num(s.weight_relative_error)});
    }
    Csv summary({"d", "targets", "certified", "max_size", "bound"});
    summary.row({num(d), num(count), num(certified), num(max_size), num(bound)});
    run.emit("teach.csv", rows.str());
    run.emit("teach_summary.csv", summary.str());
}

void cmd_flow(Run& run) {
    const auto& c = run.config();
    FlowConfig cfg;
    cfg.t_max = get<double>(c, "t_max");
    cfg.t_first = get<double>(c, "t_first");
    cfg.checkpoints_per_decade = get<std::size_t>(c, "checkpoints_per_decade");
    cfg.integrator.abs_tol = get<double>(c, "abs_tol");
    cfg.integrator.rel_tol = get<double>(c, "rel_tol");
    const double mono_tol = get<double>(c, "monotone_tol");

    Csv curves({"m", "t", "loss", "exact", "cosine"});
    Csv summary({"m", "teaching_size", "time_to_exact", "final_cosine", "loss_monotone", "accepted_steps",
                 "rejected_steps"});
    std::map<std::size_t, TrainingCurve> all;
    for (const auto m : get<std::vector<std::size_t>>(c, "m")) {
        if (m == 0) throw ConfigError("m must be >= 1");
        const auto target = build_named(NamedHypothesis::geq_compare(m));
        const auto ts = teaching_set(target, 2 * m);
        if (!ts.certified) run.fail_certification("teaching set for m=" + std::to_string(m) + " not certified");
        auto curve = run_flow(ts.examples, target, cfg);
        bool monotone = true;
        for (std::size_t i = 1; i < curve.records.size(); ++i)
            monotone &= curve.records[i].loss <= curve.records[i - 1].loss + mono_tol;
        for (const auto& r : curve.records) curves.row({num(m), num(r.t), num(r.loss), r.exact ? "1" : "0", num(r.cosine)});
        const auto first = curve.first_exact_time();
        summary.row({num(m), num(ts.examples.size()), first ? num(*first) : "", num(curve.records.back().cosine),
                     monotone ? "1" : "0", num(curve.accepted_steps), num(curve.rejected_steps)});
        all.emplace(m, std::move(curve));
    }
    Csv shape({"property", "value"});
    shape.row({"time_to_exact_strictly_increasing", is_increasing(time_to_exact(all), true) ? "1" : "0"});
    run.emit("flow_curves.csv", curves.str());
    run.emit("flow_summary.csv", summary.str());
    run.emit("flow_shape.csv", shape.str());
}

void cmd_margin_n(Run& run) {
    const auto& c = run.config();
    auto grid = get<std::vector<std::size_t>>(c, "n_grid");
    if (grid.empty()) grid = default_n_grid(get<std::size_t>(c, "max_n"));
    Csv curve({"m", "n", "mean_fraction_correct", "exact_fraction"});
    Csv stars({"m", "seed_index", "n_star"});
    Csv summary({"m", "support_vectors", "median_n_star", "growth_ratio"});
    std::optional<double> prev;
    for (const auto m : get<std::vector<std::size_t>>(c, "m")) {
        MarginExperimentConfig cfg;
        cfg.m = m;
        cfg.seeds = get<std::size_t>(c, "seeds");
        cfg.n_grid = grid;
        cfg.seed = derive_seed(get<std::uint64_t>(c, "seed"), m);
        cfg.threads = run.threads();
        const auto r = margin_sample_experiment(cfg);
        for (const auto& row : r.rows)
            curve.row({num(m), num(row.n), num(row.mean_fraction_correct), num(row.exact_fraction)});
        for (std::size_t s = 0; s < r.n_star.size(); ++s)
            stars.row({num(m), num(s), r.n_star[s] ? num(*r.n_star[s]) : ""});
        const std::string ratio = prev && r.median_n_star ? num(*r.median_n_star / *prev) : "";
        summary.row({num(m), num(r.support_vectors.size()), r.median_n_star ? num(*r.median_n_star) : "", ratio});
        prev = r.median_n_star;
    }
    run.emit("margin_curve.csv", curve.str());
    run.emit("margin_n_star.csv", stars.str());
    run.emit("margin_summary.csv", summary.str());
}

void cmd_logic_gen(Run& run) {
    const auto& c = run.config();
    logic::GeneratorConfig g;
    g.min_predicates = get<std::size_t>(c, "min_predicates");
    g.max_predicates = get<std::size_t>(c, "max_predicates");
    g.min_rules = get<std::size_t>(c, "min_rules");
    g.max_rules = get<std::size_t>(c, "max_rules");
    g.min_body = get<std::size_t>(c, "min_body");
    g.max_body = get<std::size_t>(c, "max_body");
    g.max_depth = get<std::size_t>(c, "max_depth");
    g.yes_probability = get<double>(c, "yes_probability");
    g.depth_quota = get<bool>(c, "depth_quota");
    g.max_retries = get<std::size_t>(c, "max_retries");
    g.validate();
    const auto style_name = get<std::string>(c, "style");
    if (style_name != "direct" && style_name != "with_reasoning")
        throw ConfigError("style must be direct or with_reasoning");
    const auto style = style_name == "direct" ? logic::RenderStyle::Direct : logic::RenderStyle::WithReasoning;
    const auto count = get<std::size_t>(c, "count");
    const auto seed = get<std::uint64_t>(c, "seed");

    std::vector<std::string> header{"recipe", "count", "yes_fraction", "pool_min", "pool_max", "rules_max",
                                    "depth_max"};
    for (std::size_t k = 0; k <= g.max_depth; ++k) header.push_back("depth_" + std::to_string(k));
    Csv stats(header);

    for (const auto& name : get<std::vector<std::string>>(c, "recipes")) {
        if (name != "RP" && name != "LP") throw ConfigError("recipes may contain only RP and LP");
        const auto recipe = name == "RP" ? logic::Recipe::RP : logic::Recipe::LP;
        // Recipes get distinct streams so RP and LP datasets are independent.
        const std::uint64_t stream_seed = derive_seed(seed, recipe == logic::Recipe::RP ? 1 : 2);
        std::vector<logic::LogicProblem> problems(count);
        parallel_for(count, run.threads(), [&](std::size_t begin, std::size_t end, std::size_t) {
            for (std::size_t i = begin; i < end; ++i) problems[i] = logic::generate(recipe, g, stream_seed, i);
        });

        std::string records, text;
        std::size_t yes = 0, pool_min = SIZE_MAX, pool_max = 0, rules_max = 0, depth_max = 0;
        std::vector<std::size_t> depth_hist(g.max_depth + 1, 0);
        for (std::size_t i = 0; i < count; ++i) {
            const auto& p = problems[i];
            records += logic::to_record(p, i) + "\n";
            text += logic::render(p, style) + "\n";
            yes += p.label;
            pool_min = std::min(pool_min, p.pool_size());
            pool_max = std::max(pool_max, p.pool_size());
            rules_max = std::max(rules_max, p.rule_count());
            depth_max = std::max(depth_max, p.depth);
            if (p.depth <= g.max_depth) ++depth_hist[p.depth];
        }
        std::vector<std::string> row{name, num(count), count ? num(static_cast<double>(yes) / count) : "",
                                     count ? num(pool_min) : "", num(pool_max), num(rules_max), num(depth_max)};
        for (auto h : depth_hist) row.push_back(num(h));
        stats.row(row);
        std::string lower = name == "RP" ? "rp" : "lp";
        run.emit(lower + ".jsonl", records);
        run.emit(lower + ".txt", text);
    }
    run.emit("logic_stats.csv", stats.str());
}

void cmd_logic_verify(Run& run) {
    const auto& c = run.config();
    const auto dataset_path = get<std::string>(c, "dataset");
    if (dataset_path.empty()) throw ConfigError("logic-verify needs 'dataset'");
    std::map<std::uint64_t, logic::Record> records;
    {
        std::istringstream in(read_file(dataset_path));
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto rec = logic::from_record(line);
            const auto id = rec.id;
            if (!records.emplace(id, std::move(rec)).second)
                throw ConfigError("duplicate problem id " + std::to_string(id));
        }
    }

    // Without an answers file, the dataset's own traces and labels are checked.
    struct Item {
        std::uint64_t id;
        logic::ParsedResponse response;
        std::string parse_error;
    };
    std::vector<Item> items;
    const auto answers_path = get<std::string>(c, "answers");
    const bool self_check = answers_path.empty();
    if (self_check) {
        for (const auto& [id, rec] : records) items.push_back({id, {rec.trace, rec.problem.label}, ""});
    } else {
        std::istringstream in(read_file(answers_path));
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            json j;
            try {
                j = json::parse(line);
            } catch (const json::parse_error& e) {
                throw ParseError(lineno, "answers line is not JSON: " + std::string(e.what()));
            }
            if (!j.contains("id") || !j.contains("output") || !j["id"].is_number_unsigned() || !j["output"].is_string())
                throw ParseError(lineno, "answers line needs unsigned 'id' and string 'output'");
            Item item{j["id"].get<std::uint64_t>(), {}, ""};
            if (!records.count(item.id)) throw ConfigError("answer refers to unknown id " + std::to_string(item.id));
            try {
                item.response = logic::parse_response(j["output"].get<std::string>());
            } catch (const Error& e) {
                item.parse_error = e.what();
            }
            items.push_back(std::move(item));
        }
    }

    std::string verdicts;
    std::size_t answers_ok = 0, traces_checked = 0, traces_ok = 0, exact = 0;
    for (const auto& item : items) {
        const auto& problem = records.at(item.id).problem;
        json v = {{"id", item.id}};
        bool answer_ok = false, trace_ok = true;
        const bool expected = logic::forward_chain(problem).label;
        v["expected"] = expected ? "yes" : "no";
        if (!item.parse_error.empty()) {
            trace_ok = false;
            v["parse_error"] = item.parse_error;
        } else {
            if (item.response.answer) answer_ok = logic::verify_answer(problem, *item.response.answer).accepted;
            if (item.response.trace) {
                ++traces_checked;
                const auto tv = logic::verify_trace(problem, *item.response.trace);
                trace_ok = tv.accepted;
                traces_ok += tv.accepted;
                if (!tv.accepted) {
                    v["violation_step"] = *tv.violation_step;
                    v["reason"] = tv.reason;
                }
            }
        }
        v["answer_ok"] = answer_ok;
        v["trace_present"] = item.parse_error.empty() && item.response.trace.has_value();
        v["trace_ok"] = trace_ok;
        answers_ok += answer_ok;
        exact += answer_ok && trace_ok;
        verdicts += v.dump() + "\n";
        if (self_check && !(answer_ok && trace_ok))
            run.fail_certification("oracle record " + std::to_string(item.id) + " rejected");
    }
    Csv summary({"items", "answers_accepted", "traces_checked", "traces_accepted", "exactness_rate"});
    summary.row({num(items.size()), num(answers_ok), num(traces_checked), num(traces_ok),
                 items.empty() ? "" : num(static_cast<double>(exact) / static_cast<double>(items.size()))});
    run.emit("verdicts.jsonl", verdicts);
    run.emit("verify_summary.csv", summary.str());
}

void cmd_failure_prob(Run& run) {
    const auto& c = run.config();
    const auto d = get<std::size_t>(c, "d");
    const auto trials = get<std::uint64_t>(c, "trials");
    const auto seed = get<std::uint64_t>(c, "seed");
    if (d == 0) throw ConfigError("d must be >= 1");

    std::vector<LearnerSpec> learners;
    const auto all = builtin_learners();
    for (const auto& name : get<std::vector<std::string>>(c, "learners")) {
        const auto it = std::find_if(all.begin(), all.end(), [&](const LearnerSpec& l) { return l.name() == name; });
        if (it == all.end()) throw ConfigError("unknown learner '" + name + "'");
        learners.push_back(*it);
    }
    const LinearThreshold targets[2] = {build_named(NamedHypothesis::all_zero(d)),
                                        build_named(NamedHypothesis::origin_indicator(d))};
    const auto dist = InputDistribution::uniform(d);
    const double agree = 1.0 - std::ldexp(1.0, -static_cast<int>(d));

    Csv rows({"learner", "target", "n", "trials", "phi_hat", "standard_error", "halfwidth", "fit_errors"});
    Csv bounds({"learner", "n", "max_pair_phi", "max_pair_se", "bound", "holds"});
    for (std::size_t li = 0; li < learners.size(); ++li) {
        for (const auto n : get<std::vector<std::uint64_t>>(c, "n")) {
            FailureEstimate est[2];
            for (int t = 0; t < 2; ++t) {
                est[t] = estimate_failure(learners[li], targets[t], dist, n, trials,
                                          derive_seed(derive_seed(seed, li), 2 * n + t), run.threads());
                rows.row({learners[li].name(), t == 0 ? "f0" : "f1", num(n), num(trials), num(est[t].phi_hat),
                          num(est[t].standard_error), num(est[t].confidence_halfwidth), num(est[t].fit_errors)});
            }
            const auto& worst = est[0].phi_hat >= est[1].phi_hat ? est[0] : est[1];
            const double bound = failure_lower_bound(n, agree).power_bound;
            const bool holds = worst.phi_hat >= bound - 3.0 * worst.standard_error;
            if (!holds) run.fail_certification(learners[li].name() + " n=" + std::to_string(n) + " below bound");
            bounds.row({learners[li].name(), num(n), num(worst.phi_hat), num(worst.standard_error), num(bound),
                        holds ? "1" : "0"});
        }
    }
    run.emit("failure.csv", rows.str());
    run.emit("failure_bound.csv", bounds.str());
}

using Command = void (*)(Run&);

const std::vector<std::pair<std::string, std::pair<Command, const char*>>>& commands() {
    static const std::vector<std::pair<std::string, std::pair<Command, const char*>>> list = {
        {"disagreement", {cmd_disagreement, "Exact and Monte Carlo disagreement of LEFT>=RIGHT vs LEFT>RIGHT"}},
        {"critical-n", {cmd_critical_n, "Critical sample sizes for pairwise and orbit bounds"}},
        {"teach", {cmd_teach, "Teaching sets for random separable targets"}},
        {"flow", {cmd_flow, "Gradient flow on teaching sets of LEFT>=RIGHT"}},
        {"margin-n", {cmd_margin_n, "Max-margin sample requirement on support-vector data"}},
        {"logic-gen", {cmd_logic_gen, "Generate RP/LP logic datasets"}},
        {"logic-verify", {cmd_logic_verify, "Verify answers and traces against a logic dataset"}},
        {"failure-prob", {cmd_failure_prob, "Monte Carlo learner failure probabilities vs the lower bound"}},
    };
    return list;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"exactlab experiment runner"};
    app.set_version_flag("--version", EXACTLAB_VERSION);
    app.require_subcommand(1);

    Flags flags;
    for (const auto& [name, entry] : commands()) {
        auto* sub = app.add_subcommand(name, entry.second);
        sub->add_option("--config", flags.config_path, "JSON config file")->check(CLI::ExistingFile);
        sub->add_option("--seed", flags.seed, "Master seed");
        sub->add_option("--out", flags.out, "Output directory");
        sub->add_option("--threads", flags.threads, "Worker threads (0 = all cores)");
        sub->add_option("--m", flags.m, "Half-dimension values");
        sub->add_option("--d", flags.d, "Dimension");
        sub->add_option("--trials", flags.trials, "Monte Carlo trials");
        sub->add_option("--n-grid", flags.n_grid, "Sample sizes");
        sub->add_option("--count", flags.count, "Number of problems");
    }
    CLI11_PARSE(app, argc, argv);

    const auto* chosen = app.get_subcommands().front();
    const std::string name = chosen->get_name();
    const auto entry = std::find_if(commands().begin(), commands().end(), [&](const auto& e) { return e.first == name; });

    std::optional<Run> run;
    try {
        json config;
        try {
            config = resolve_config(name, flags);
        } catch (const json::exception& e) {
            throw ConfigError(e.what());
        }
        run.emplace(name, config);
        try {
            entry->second.first(*run);
        } catch (const json::exception& e) {
            throw ConfigError(e.what());
        }
        run->finish();
        if (!run->certified()) {
            std::cerr << name << ": certification failed, see manifest.json\n";
            return kExitCertification;
        }
        return 0;
    } catch (const Error& e) {
        std::cerr << name << ": " << e.kind() << ": " << e.what() << "\n";
        if (run) {
            run->abort(e);
        } else if (flags.out) {
            // Configuration never resolved; still leave a record where asked.
            fs::create_directories(*flags.out);
            write_file(fs::path(*flags.out) / "error.json",
                       json{{"command", name}, {"kind", e.kind()}, {"message", e.what()}}.dump(2) + "\n");
        }
        return kExitError;
    } catch (const std::exception& e) {
        std::cerr << name << ": internal error: " << e.what() << "\n";
        if (run) run->abort(Error("internal_error", e.what()));
        return kExitError;
    }
}
