#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbench/errors.hpp"
#include "cbench/question.hpp"

namespace cbench {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

namespace detail {

inline std::string nk(int v) { return "n" + std::to_string(v); }

inline int parse_nk(const std::string& key) {
    if (key.size() < 2 || key[0] != 'n')
        throw ParseError("bad node key '" + key + "'");
    for (size_t i = 1; i < key.size(); ++i)
        if (key[i] < '0' || key[i] > '9') throw ParseError("bad node key '" + key + "'");
    return std::stoi(key.substr(1));
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

inline uint64_t fnv1a(std::string_view s, uint64_t h) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

inline std::string content_hash(std::string_view s) {
    uint64_t a = fnv1a(s, 0xCBF29CE484222325ull);
    uint64_t b = fnv1a(s, 0x84222325CBF29CE4ull);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(a),
                  static_cast<unsigned long long>(b));
    return buf;
}

} // namespace detail

inline json record_to_json(const QuestionRecord& q) {
    json j;
    j["id"] = q.id;
    j["schema_version"] = kSchemaVersion;
    j["task"] = task_tag(q.task);
    j["shape"] = q.graph.shape().tier_sizes;
    j["iterations"] = q.graph.gen_params().iterations;
    j["seed"] = q.seed;

    json params;
    const JunctionProbabilities& p = q.graph.gen_params().probs;
    params["p_fork"] = p.fork;
    params["p_chain"] = p.chain;
    params["p_collider"] = p.collider;
    if (q.ce_d) params["ce_d"] = *q.ce_d;
    if (q.wi_n) params["wi_n"] = *q.wi_n;
    j["params"] = params;

    j["name_style"] = q.name_style.tag();
    std::vector<int> tiers;
    for (int v = 0; v < q.graph.node_count(); ++v) tiers.push_back(q.graph.tier_of(v));
    j["tiers"] = tiers;
    j["edges"] = q.graph.edges();

    json names = json::object();
    for (auto& [v, name] : q.names) names[detail::nk(v)] = name;
    j["names"] = names;

    json functions = json::object();
    if (q.scm)
        for (auto& [v, expr] : q.scm->functions)
            functions[detail::nk(v)] = render_expr(expr, detail::nk);
    j["functions"] = functions;

    j["question_text"] = q.question_text;

    json truth;
    switch (q.task) {
        case TaskKind::cp: {
            json pairs = json::array();
            for (const auto& pair : q.ground_truth.cp) {
                json pj;
                pj["cause"] = pair.cause;
                pj["effect"] = pair.effect;
                json paths = json::array();
                for (const Path& path : pair.paths) paths.push_back(path.nodes);
                pj["paths"] = paths;
                pairs.push_back(pj);
            }
            truth["pairs"] = pairs;
            break;
        }
        case TaskKind::ba: {
            json pairs = json::array();
            for (const auto& pair : q.ground_truth.ba) {
                json pj;
                pj["cause"] = pair.treatment;
                pj["effect"] = pair.outcome;
                json sets = json::array();
                for (const auto& z : pair.minimal_sets) sets.push_back(z);
                pj["minimal_sets"] = sets;
                pairs.push_back(pj);
            }
            truth["pairs"] = pairs;
            break;
        }
        case TaskKind::fi:
        case TaskKind::ci: {
            json states = json::object();
            for (auto& [v, state] : q.ground_truth.states) states[detail::nk(v)] = state;
            truth["states"] = states;
            break;
        }
    }
    j["ground_truth"] = truth;

    json stats;
    stats["avg_indegree"] = q.stats.avg_indegree;
    stats["chains"] = q.stats.chains;
    stats["forks"] = q.stats.forks;
    stats["colliders"] = q.stats.colliders;
    j["stats"] = stats;
    return j;
}

inline QuestionRecord record_from_json(const json& j) {
    if (j.at("schema_version").get<int>() != kSchemaVersion)
        throw ParseError("unknown schema version " + j.at("schema_version").dump());

    GraphShape shape{j.at("shape").get<std::vector<int>>()};
    const json& params = j.at("params");
    GenParams gen;
    gen.shape = shape;
    gen.iterations = j.at("iterations").get<int>();
    gen.probs = {params.at("p_fork").get<double>(), params.at("p_chain").get<double>(),
                 params.at("p_collider").get<double>()};
    gen.seed = j.at("seed").get<uint64_t>();

    std::set<Edge> edges;
    for (const auto& e : j.at("edges")) edges.emplace(e.at(0).get<int>(), e.at(1).get<int>());
    TieredDag graph(shape, edges, gen);

    std::vector<int> tiers = j.at("tiers").get<std::vector<int>>();
    for (int v = 0; v < graph.node_count(); ++v)
        if (tiers[static_cast<size_t>(v)] != graph.tier_of(v))
            throw ParseError("tier list disagrees with the shape");

    QuestionRecord q = detail::base_record(parse_task(j.at("task").get<std::string>()), graph,
                                           {}, NameStyle::parse(j.at("name_style").get<std::string>()));
    q.id = j.at("id").get<std::string>();
    q.seed = gen.seed;
    q.ground_truth.task = q.task;
    for (auto& [key, name] : j.at("names").items())
        q.names[detail::parse_nk(key)] = name.get<std::string>();
    if (params.contains("ce_d")) q.ce_d = params.at("ce_d").get<double>();
    if (params.contains("wi_n")) q.wi_n = params.at("wi_n").get<int>();
    q.question_text = j.at("question_text").get<std::string>();

    if (!j.at("functions").empty()) {
        BoolScm scm{graph, {}};
        for (auto& [key, text] : j.at("functions").items())
            scm.functions.emplace(detail::parse_nk(key),
                                  parse_expr(text.get<std::string>(), detail::parse_nk));
        q.scm = std::move(scm);
    }

    const json& truth = j.at("ground_truth");
    switch (q.task) {
        case TaskKind::cp:
            for (const auto& pj : truth.at("pairs")) {
                CausalPathsTruth pair;
                pair.cause = pj.at("cause").get<int>();
                pair.effect = pj.at("effect").get<int>();
                for (const auto& nodes : pj.at("paths")) {
                    Path path;
                    path.nodes = nodes.get<std::vector<int>>();
                    path.dirs.assign(path.nodes.size() - 1, Dir::forward);
                    pair.paths.push_back(std::move(path));
                }
                q.ground_truth.cp.push_back(std::move(pair));
            }
            break;
        case TaskKind::ba:
            for (const auto& pj : truth.at("pairs")) {
                AdjustmentGroundTruth pair;
                pair.treatment = pj.at("cause").get<int>();
                pair.outcome = pj.at("effect").get<int>();
                for (const auto& zj : pj.at("minimal_sets")) {
                    std::set<int> z;
                    for (const auto& v : zj) z.insert(v.get<int>());
                    pair.minimal_sets.push_back(std::move(z));
                }
                q.ground_truth.ba.push_back(std::move(pair));
            }
            break;
        case TaskKind::fi:
        case TaskKind::ci:
            for (auto& [key, state] : truth.at("states").items())
                q.ground_truth.states[detail::parse_nk(key)] = state.get<bool>();
            // O and C are derived from the seed, not stored
            q.observed = derive_observed(graph, q.seed);
            if (q.task == TaskKind::ci) q.interventions = derive_interventions(*q.scm, q.seed, *q.wi_n);
            break;
    }

    const json& stats = j.at("stats");
    q.stats.avg_indegree = stats.at("avg_indegree").get<double>();
    q.stats.chains = stats.at("chains").get<long>();
    q.stats.forks = stats.at("forks").get<long>();
    q.stats.colliders = stats.at("colliders").get<long>();
    return q;
}

inline void write_records(const std::filesystem::path& path,
                          const std::vector<QuestionRecord>& records) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    for (const QuestionRecord& q : records) out << record_to_json(q).dump() << "\n";
    out.flush();
    if (!out) throw ConfigError("write to '" + path.string() + "' failed");
}

inline std::vector<QuestionRecord> read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::vector<QuestionRecord> records;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            records.push_back(record_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(path.filename().string() + " line " + std::to_string(line_no) +
                             ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(path.filename().string() + " line " + std::to_string(line_no) +
                             ": " + e.what());
        } catch (const ValidationError& e) {
            throw ParseError(path.filename().string() + " line " + std::to_string(line_no) +
                             ": " + e.what());
        }
    }
    return records;
}

// Recomputes everything derivable from (shape, iterations, probs, seed) and
// compares with the stored record: graph edges, names, functions, ground
// truth and stats. Throws ValidationError naming the drifted piece.
inline void verify_record(const QuestionRecord& q, const TermLexicon& lexicon = TermLexicon::builtin()) {
    const GenParams& gen = q.graph.gen_params();
    TieredDag g = generate_graph(q.graph.shape(), gen.iterations, gen.probs, q.seed);
    auto fail = [&](const std::string& what) {
        throw ValidationError("record " + q.id + ": stored " + what +
                              " disagrees with recomputation");
    };
    if (g.edges() != q.graph.edges()) fail("edge set");
    if (assign_names(g, q.name_style, lexicon, q.seed) != q.names) fail("name map");
    if (complexity_stats(g) != q.stats) fail("complexity stats");

    switch (q.task) {
        case TaskKind::cp: {
            if (!q.ce_d) fail("ce_d parameter");
            auto fresh = build_cp_question(g, q.names, q.name_style, *q.ce_d);
            if (fresh.ground_truth.cp != q.ground_truth.cp) fail("CP ground truth");
            break;
        }
        case TaskKind::ba: {
            if (!q.ce_d) fail("ce_d parameter");
            auto fresh = build_ba_question(g, q.names, q.name_style, *q.ce_d);
            if (fresh.ground_truth.ba != q.ground_truth.ba) fail("BA ground truth");
            break;
        }
        case TaskKind::fi:
        case TaskKind::ci: {
            BoolScm scm = generate_functions(g, q.seed);
            if (!q.scm) fail("SCM");
            for (auto& [v, expr] : scm.functions)
                if (render_expr(expr, detail::nk) !=
                    render_expr(q.scm->functions.at(v), detail::nk))
                    fail("structural function for " + detail::nk(v));
            QuestionRecord fresh =
                q.task == TaskKind::fi
                    ? build_fi_question(scm, q.names, q.name_style, q.seed)
                    : build_ci_question(scm, q.names, q.name_style, *q.wi_n, q.seed);
            if (fresh.ground_truth.states != q.ground_truth.states) fail("queried states");
            break;
        }
    }
}

// Per-task generation plan. ce_d lists can be overridden per shape; styles
// are cycled across the graphs of each condition.
struct TaskConfig {
    std::vector<GraphShape> shapes;
    std::vector<int> iterations;
    int graphs_per_condition = 50;
    std::vector<NameStyle> styles{NameStyle{}};
    std::vector<double> ce_d;
    std::map<std::string, std::vector<double>> ce_d_per_shape;
    std::vector<int> wi_n;

    const std::vector<double>& ce_d_for(const GraphShape& shape) const {
        auto it = ce_d_per_shape.find(shape.display());
        return it != ce_d_per_shape.end() ? it->second : ce_d;
    }
};

struct BenchmarkConfig {
    uint64_t master_seed = 0;
    bool seed_set = false;
    JunctionProbabilities probs{0.1, 0.1, 0.1};
    FilterCaps caps;
    AdjustmentSearchLimits adjustment_limits;
    std::map<TaskKind, TaskConfig> tasks;

    void validate() const {
        if (!seed_set) throw ConfigError("benchmark config needs a master seed");
        probs.validate();
        if (tasks.empty()) throw ConfigError("benchmark config lists no tasks");
        for (auto& [task, tc] : tasks) {
            if (tc.shapes.empty()) throw ConfigError(task_tag(task) + ": no shapes configured");
            for (const GraphShape& s : tc.shapes) {
                s.validate();
                if (s.tiers() < 5)
                    throw ConfigError(task_tag(task) + ": benchmark shapes need at least 5 tiers");
            }
            if (tc.iterations.empty()) throw ConfigError(task_tag(task) + ": no iterations");
            if (tc.graphs_per_condition < 1)
                throw ConfigError(task_tag(task) + ": graphs_per_condition must be >= 1");
            if (tc.styles.empty()) throw ConfigError(task_tag(task) + ": no name styles");
            for (const NameStyle& style : tc.styles) {
                bool cp_ba = task == TaskKind::cp || task == TaskKind::ba;
                if (cp_ba && style.kind == NameStyleKind::change_term)
                    throw ConfigError("change-style names are for FI/CI tasks");
                if (!cp_ba && style.kind == NameStyleKind::plain_term)
                    throw ConfigError("plain-style names are for CP/BA tasks");
            }
            if ((task == TaskKind::cp || task == TaskKind::ba) && tc.ce_d.empty())
                throw ConfigError(task_tag(task) + ": no ce_d values");
            if (task == TaskKind::ci && tc.wi_n.empty())
                throw ConfigError("ci: no wi_n values");
        }
    }

    static BenchmarkConfig paper_default();
    static BenchmarkConfig parse(std::string_view text);
    std::string to_text() const;
};

struct ManifestRow {
    std::string task;
    std::string shape;
    std::string param;
    long prefilter = 0;
    long count = 0;
    double avg_indegree = 0.0;
    double chains = 0.0;
    double forks = 0.0;
    double colliders = 0.0;
};

struct BenchmarkManifest {
    std::string config_hash;
    uint64_t master_seed = 0;
    std::vector<ManifestRow> rows;
    std::map<std::string, long> files;
};

inline json manifest_to_json(const BenchmarkManifest& m) {
    json j;
    j["schema_version"] = kSchemaVersion;
    j["config_hash"] = m.config_hash;
    j["master_seed"] = m.master_seed;
    json rows = json::array();
    for (const ManifestRow& r : m.rows) {
        json rj;
        rj["task"] = r.task;
        rj["shape"] = r.shape;
        rj["param"] = r.param;
        rj["prefilter"] = r.prefilter;
        rj["count"] = r.count;
        rj["avg_indegree"] = r.avg_indegree;
        rj["chains"] = r.chains;
        rj["forks"] = r.forks;
        rj["colliders"] = r.colliders;
        rows.push_back(rj);
    }
    j["rows"] = rows;
    j["files"] = m.files;
    return j;
}

inline BenchmarkManifest manifest_from_json(const json& j) {
    if (j.at("schema_version").get<int>() != kSchemaVersion)
        throw ParseError("unknown manifest schema version");
    BenchmarkManifest m;
    m.config_hash = j.at("config_hash").get<std::string>();
    m.master_seed = j.at("master_seed").get<uint64_t>();
    for (const auto& rj : j.at("rows")) {
        ManifestRow r;
        r.task = rj.at("task").get<std::string>();
        r.shape = rj.at("shape").get<std::string>();
        r.param = rj.at("param").get<std::string>();
        r.prefilter = rj.at("prefilter").get<long>();
        r.count = rj.at("count").get<long>();
        r.avg_indegree = rj.at("avg_indegree").get<double>();
        r.chains = rj.at("chains").get<double>();
        r.forks = rj.at("forks").get<double>();
        r.colliders = rj.at("colliders").get<double>();
        m.rows.push_back(r);
    }
    for (auto& [file, count] : j.at("files").items()) m.files[file] = count.get<long>();
    return m;
}

struct AssembleOptions {
    const TermLexicon* lexicon = nullptr;
    const QuestionTemplates* templates = nullptr;
    std::ostream* log = nullptr;
};

// Deterministic benchmark assembly. Graph pools are keyed by (shape,
// iterations, index) only, so every task shares the same graphs; the
// per-graph seed is drawn from
// Rng(master).child("graph").child(shape).child(I).child(index).
inline BenchmarkManifest assemble(const BenchmarkConfig& config,
                                  const std::filesystem::path& out_dir,
                                  const AssembleOptions& opts = {}) {
    config.validate();
    const TermLexicon& lexicon = opts.lexicon ? *opts.lexicon : TermLexicon::builtin();
    const QuestionTemplates& tmpl =
        opts.templates ? *opts.templates : QuestionTemplates::builtin();
    std::filesystem::create_directories(out_dir);

    Rng master(config.master_seed);
    std::map<std::string, TieredDag> graph_pool;
    auto pooled_graph = [&](const GraphShape& shape, int iters, int idx) -> const TieredDag& {
        std::string key = shape.display() + "/" + std::to_string(iters) + "/" + std::to_string(idx);
        auto it = graph_pool.find(key);
        if (it != graph_pool.end()) return it->second;
        uint64_t seed = master.child("graph")
                            .child(shape.display())
                            .child(static_cast<uint64_t>(iters))
                            .child(static_cast<uint64_t>(idx))
                            .next_u64();
        return graph_pool.emplace(key, generate_graph(shape, iters, config.probs, seed))
            .first->second;
    };

    BenchmarkManifest manifest;
    manifest.config_hash = detail::content_hash(config.to_text());
    manifest.master_seed = config.master_seed;

    auto log = [&](const std::string& message) {
        if (opts.log) *opts.log << message << "\n";
    };

    for (TaskKind task : {TaskKind::cp, TaskKind::ba, TaskKind::fi, TaskKind::ci}) {
        auto tc_it = config.tasks.find(task);
        if (tc_it == config.tasks.end()) continue;
        const TaskConfig& tc = tc_it->second;

        std::vector<QuestionRecord> records;
        for (const GraphShape& shape : tc.shapes) {
            struct Bucket {
                long prefilter = 0;
                std::vector<ComplexityStats> kept;
                long count = 0;
            };
            std::map<std::string, Bucket> buckets; // param -> counters

            for (size_t i_idx = 0; i_idx < tc.iterations.size(); ++i_idx) {
                int iters = tc.iterations[i_idx];
                for (int idx = 0; idx < tc.graphs_per_condition; ++idx) {
                    const TieredDag& g = pooled_graph(shape, iters, idx);
                    const NameStyle& style =
                        tc.styles[(i_idx * static_cast<size_t>(tc.graphs_per_condition) +
                                   static_cast<size_t>(idx)) %
                                  tc.styles.size()];
                    auto names = assign_names(g, style, lexicon, g.gen_params().seed);
                    std::string style_tag = style.tag();
                    for (char& c : style_tag)
                        if (c == ':') c = '-';
                    std::string id_stem = task_tag(task) + "-" + shape.display() + "-i" +
                                          std::to_string(iters) + "-g" + std::to_string(idx);

                    auto finish = [&](QuestionRecord q, const std::string& param_tag,
                                      const std::string& param_label) {
                        q.id = id_stem + "-" + param_tag + "-" + style_tag;
                        Bucket& bucket = buckets[param_label];
                        ++bucket.prefilter;
                        if (q.task == TaskKind::cp || q.task == TaskKind::ba) {
                            if (!complexity_filter(q, config.caps)) {
                                log("filtered " + q.id + " (too many causal paths)");
                                return;
                            }
                        }
                        ++bucket.count;
                        bucket.kept.push_back(q.stats);
                        records.push_back(std::move(q));
                    };

                    switch (task) {
                        case TaskKind::cp:
                            for (double ce_d : tc.ce_d_for(shape))
                                finish(build_cp_question(g, names, style, ce_d, tmpl),
                                       "ced" + detail::format_double(ce_d * 100),
                                       "ce_d=" + detail::format_double(ce_d));
                            break;
                        case TaskKind::ba:
                            for (double ce_d : tc.ce_d_for(shape)) {
                                try {
                                    QuestionRecord q = build_ba_question(
                                        g, names, style, ce_d, tmpl, config.adjustment_limits);
                                    bool empty_family = false;
                                    for (const auto& pair : q.ground_truth.ba)
                                        if (pair.minimal_sets.empty()) empty_family = true;
                                    if (empty_family) {
                                        log("discarded " + id_stem +
                                            " (no valid adjustment set within the size bound)");
                                        ++buckets["ce_d=" + detail::format_double(ce_d)].prefilter;
                                        continue;
                                    }
                                    finish(std::move(q), "ced" + detail::format_double(ce_d * 100),
                                           "ce_d=" + detail::format_double(ce_d));
                                } catch (const BudgetError& e) {
                                    log("discarded " + id_stem + " (" + e.what() + ")");
                                    ++buckets["ce_d=" + detail::format_double(ce_d)].prefilter;
                                }
                            }
                            break;
                        case TaskKind::fi: {
                            BoolScm scm = generate_functions(g, g.gen_params().seed);
                            finish(build_fi_question(scm, names, style, g.gen_params().seed, tmpl),
                                   "q", "-");
                            break;
                        }
                        case TaskKind::ci: {
                            BoolScm scm = generate_functions(g, g.gen_params().seed);
                            for (int wi_n : tc.wi_n)
                                finish(build_ci_question(scm, names, style, wi_n,
                                                         g.gen_params().seed, tmpl),
                                       "win" + std::to_string(wi_n),
                                       "wi_n=" + std::to_string(wi_n));
                            break;
                        }
                    }
                }
            }

            for (auto& [param, bucket] : buckets) {
                ManifestRow row;
                row.task = task_tag(task);
                row.shape = shape.display();
                row.param = param;
                row.prefilter = bucket.prefilter;
                row.count = bucket.count;
                for (const ComplexityStats& s : bucket.kept) {
                    row.avg_indegree += s.avg_indegree;
                    row.chains += static_cast<double>(s.chains);
                    row.forks += static_cast<double>(s.forks);
                    row.colliders += static_cast<double>(s.colliders);
                }
                if (bucket.count > 0) {
                    row.avg_indegree /= static_cast<double>(bucket.count);
                    row.chains /= static_cast<double>(bucket.count);
                    row.forks /= static_cast<double>(bucket.count);
                    row.colliders /= static_cast<double>(bucket.count);
                }
                manifest.rows.push_back(std::move(row));
            }
        }

        std::string filename = task_tag(task) + ".jsonl";
        write_records(out_dir / filename, records);
        manifest.files[filename] = static_cast<long>(records.size());
    }

    std::ofstream mf(out_dir / "manifest.json", std::ios::binary);
    if (!mf) throw ConfigError("cannot write manifest.json");
    mf << manifest_to_json(manifest).dump(2) << "\n";
    return manifest;
}

inline BenchmarkManifest read_manifest(const std::filesystem::path& dir) {
    std::ifstream in(dir / "manifest.json", std::ios::binary);
    if (!in) throw ConfigError("cannot open manifest.json in '" + dir.string() + "'");
    try {
        return manifest_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw ParseError(std::string("manifest.json: ") + e.what());
    }
}

// Loads all record files named in the manifest, checking the stored counts.
inline std::map<TaskKind, std::vector<QuestionRecord>> read_bench(
    const std::filesystem::path& dir, BenchmarkManifest* manifest_out = nullptr) {
    BenchmarkManifest manifest = read_manifest(dir);
    std::map<TaskKind, std::vector<QuestionRecord>> out;
    for (auto& [file, count] : manifest.files) {
        auto records = read_records(dir / file);
        if (static_cast<long>(records.size()) != count)
            throw ValidationError(file + " holds " + std::to_string(records.size()) +
                                  " records but the manifest says " + std::to_string(count));
        TaskKind task = parse_task(std::filesystem::path(file).stem().string());
        out[task] = std::move(records);
    }
    if (manifest_out) *manifest_out = std::move(manifest);
    return out;
}

inline std::string stats_report_text(const BenchmarkManifest& m) {
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf, "%-5s %-6s %-9s %6s %6s %8s %8s %8s %8s\n", "task", "shape",
                  "param", "pre", "qn", "ind", "ch", "fo", "co");
    out += buf;
    for (const ManifestRow& r : m.rows) {
        std::snprintf(buf, sizeof buf, "%-5s %-6s %-9s %6ld %6ld %8.2f %8.2f %8.2f %8.2f\n",
                      r.task.c_str(), r.shape.c_str(), r.param.c_str(), r.prefilter, r.count,
                      r.avg_indegree, r.chains, r.forks, r.colliders);
        out += buf;
    }
    return out;
}

inline std::string stats_report_csv(const BenchmarkManifest& m) {
    std::string out = "task,shape,param,prefilter,count,avg_indegree,chains,forks,colliders\n";
    char buf[160];
    for (const ManifestRow& r : m.rows) {
        std::snprintf(buf, sizeof buf, "%s,%s,%s,%ld,%ld,%.4f,%.4f,%.4f,%.4f\n", r.task.c_str(),
                      r.shape.c_str(), r.param.c_str(), r.prefilter, r.count, r.avg_indegree,
                      r.chains, r.forks, r.colliders);
        out += buf;
    }
    return out;
}

namespace detail {

// Minimal INI reader: [section] headers, key = value lines, '#' comments.
inline std::map<std::string, std::map<std::string, std::string>> parse_ini(std::string_view text) {
    std::map<std::string, std::map<std::string, std::string>> out;
    std::string section;
    size_t line_no = 0;
    size_t start = 0;
    auto trim = [](std::string s) {
        size_t a = s.find_first_not_of(" \t\r");
        size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        size_t end = nl == std::string_view::npos ? text.size() : nl;
        std::string line(text.substr(start, end - start));
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (!line.empty()) {
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ParseError("config line " + std::to_string(line_no) +
                                     ": unterminated section header");
                section = line.substr(1, line.size() - 2);
            } else {
                auto eq = line.find('=');
                if (eq == std::string::npos || section.empty())
                    throw ParseError("config line " + std::to_string(line_no) +
                                     ": expected 'key = value' inside a section");
                std::string key = trim(line.substr(0, eq));
                if (out[section].count(key))
                    throw ParseError("config line " + std::to_string(line_no) +
                                     ": duplicate key '" + key + "'");
                out[section][key] = trim(line.substr(eq + 1));
            }
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

inline std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= value.size()) {
        size_t comma = value.find(',', start);
        size_t end = comma == std::string::npos ? value.size() : comma;
        std::string item = value.substr(start, end - start);
        size_t a = item.find_first_not_of(" \t");
        size_t b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

inline std::vector<int> parse_iterations(const std::string& value) {
    std::vector<int> out;
    if (auto dash = value.find('-'); dash != std::string::npos) {
        int lo = std::stoi(value.substr(0, dash));
        int hi = std::stoi(value.substr(dash + 1));
        for (int i = lo; i <= hi; ++i) out.push_back(i);
    } else {
        for (const std::string& item : split_list(value)) out.push_back(std::stoi(item));
    }
    return out;
}

} // namespace detail

inline BenchmarkConfig BenchmarkConfig::paper_default() {
    BenchmarkConfig config;
    config.probs = {0.1, 0.1, 0.1};

    auto shapes = [](std::initializer_list<const char*> names) {
        std::vector<GraphShape> out;
        for (const char* n : names) out.push_back(GraphShape::parse(n));
        return out;
    };
    auto styles = [](std::initializer_list<const char*> tags) {
        std::vector<NameStyle> out;
        for (const char* t : tags) out.push_back(NameStyle::parse(t));
        return out;
    };

    TaskConfig cp;
    cp.shapes = shapes({"1x5", "2x5", "1x6", "2x6"});
    cp.iterations = {3, 4, 5, 6};
    cp.graphs_per_condition = 50;
    cp.styles = styles({"random", "plain:biology", "plain:chemistry", "plain:economics",
                        "plain:physics"});
    cp.ce_d = {1.0};
    cp.ce_d_per_shape["1x6"] = {1.0, 0.5};
    cp.ce_d_per_shape["2x6"] = {1.0, 0.5};
    config.tasks[TaskKind::cp] = cp;
    config.tasks[TaskKind::ba] = cp;

    TaskConfig fi;
    fi.shapes = shapes({"1x5", "2x5", "1x6", "2x6", "3x5"});
    fi.iterations = {3, 4, 5, 6};
    fi.graphs_per_condition = 50;
    fi.styles = styles({"random", "change:biology", "change:chemistry", "change:economics",
                        "change:physics"});
    config.tasks[TaskKind::fi] = fi;

    TaskConfig ci = fi;
    ci.wi_n = {1, 2, 3};
    config.tasks[TaskKind::ci] = ci;
    return config;
}

inline BenchmarkConfig BenchmarkConfig::parse(std::string_view text) {
    BenchmarkConfig config = paper_default();
    config.tasks.clear();
    auto ini = detail::parse_ini(text);

    if (auto bench = ini.find("bench"); bench != ini.end()) {
        for (auto& [key, value] : bench->second) {
            if (key == "seed") {
                config.master_seed = std::stoull(value);
                config.seed_set = true;
            } else if (key == "p_fork") {
                config.probs.fork = std::stod(value);
            } else if (key == "p_chain") {
                config.probs.chain = std::stod(value);
            } else if (key == "p_collider") {
                config.probs.collider = std::stod(value);
            } else if (key == "max_paths_per_pair") {
                config.caps.max_paths_per_pair = std::stoi(value);
            } else if (key == "max_total_paths") {
                config.caps.max_total_paths = std::stoi(value);
            } else if (key == "max_adjustment_size") {
                config.adjustment_limits.max_size = std::stoi(value);
            } else {
                throw ParseError("unknown [bench] key '" + key + "'");
            }
        }
    }

    for (TaskKind task : {TaskKind::cp, TaskKind::ba, TaskKind::fi, TaskKind::ci}) {
        auto section = ini.find(task_tag(task));
        if (section == ini.end()) continue;
        TaskConfig tc;
        tc.styles.clear();
        for (auto& [key, value] : section->second) {
            if (key == "shapes") {
                for (const std::string& s : detail::split_list(value))
                    tc.shapes.push_back(GraphShape::parse(s));
            } else if (key == "iterations") {
                tc.iterations = detail::parse_iterations(value);
            } else if (key == "graphs_per_condition") {
                tc.graphs_per_condition = std::stoi(value);
            } else if (key == "styles") {
                for (const std::string& s : detail::split_list(value))
                    tc.styles.push_back(NameStyle::parse(s));
            } else if (key == "ce_d") {
                for (const std::string& s : detail::split_list(value))
                    tc.ce_d.push_back(std::stod(s));
            } else if (key.starts_with("ce_d:")) {
                std::vector<double>& per = tc.ce_d_per_shape[key.substr(5)];
                for (const std::string& s : detail::split_list(value)) per.push_back(std::stod(s));
            } else if (key == "wi_n") {
                for (const std::string& s : detail::split_list(value))
                    tc.wi_n.push_back(std::stoi(s));
            } else {
                throw ParseError("unknown [" + task_tag(task) + "] key '" + key + "'");
            }
        }
        if (tc.styles.empty()) tc.styles.push_back(NameStyle{});
        config.tasks[task] = std::move(tc);
    }
    if (config.tasks.empty())
        throw ParseError("config defines no task sections ([cp], [ba], [fi], [ci])");
    return config;
}

inline std::string BenchmarkConfig::to_text() const {
    std::string out = "[bench]\n";
    if (seed_set) out += "seed = " + std::to_string(master_seed) + "\n";
    out += "p_fork = " + detail::format_double(probs.fork) + "\n";
    out += "p_chain = " + detail::format_double(probs.chain) + "\n";
    out += "p_collider = " + detail::format_double(probs.collider) + "\n";
    out += "max_paths_per_pair = " + std::to_string(caps.max_paths_per_pair) + "\n";
    out += "max_total_paths = " + std::to_string(caps.max_total_paths) + "\n";
    out += "max_adjustment_size = " + std::to_string(adjustment_limits.max_size) + "\n";
    for (auto& [task, tc] : tasks) {
        out += "\n[" + task_tag(task) + "]\n";
        std::string shapes;
        for (const GraphShape& s : tc.shapes) {
            if (!shapes.empty()) shapes += ", ";
            shapes += s.display();
        }
        out += "shapes = " + shapes + "\n";
        std::string iters;
        for (int i : tc.iterations) {
            if (!iters.empty()) iters += ", ";
            iters += std::to_string(i);
        }
        out += "iterations = " + iters + "\n";
        out += "graphs_per_condition = " + std::to_string(tc.graphs_per_condition) + "\n";
        std::string styles;
        for (const NameStyle& s : tc.styles) {
            if (!styles.empty()) styles += ", ";
            styles += s.tag();
        }
        out += "styles = " + styles + "\n";
        if (!tc.ce_d.empty()) {
            std::string list;
            for (double d : tc.ce_d) {
                if (!list.empty()) list += ", ";
                list += detail::format_double(d);
            }
            out += "ce_d = " + list + "\n";
        }
        for (auto& [shape, list_values] : tc.ce_d_per_shape) {
            std::string list;
            for (double d : list_values) {
                if (!list.empty()) list += ", ";
                list += detail::format_double(d);
            }
            out += "ce_d:" + shape + " = " + list + "\n";
        }
        if (!tc.wi_n.empty()) {
            std::string list;
            for (int n : tc.wi_n) {
                if (!list.empty()) list += ", ";
                list += std::to_string(n);
            }
            out += "wi_n = " + list + "\n";
        }
    }
    return out;
}

} // namespace cbench
