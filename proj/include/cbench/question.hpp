#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cbench/errors.hpp"
#include "cbench/graph.hpp"
#include "cbench/naming.hpp"
#include "cbench/oracles.hpp"
#include "cbench/scm.hpp"

namespace cbench {

enum class TaskKind { cp, ba, fi, ci };

inline std::string task_tag(TaskKind t) {
    switch (t) {
        case TaskKind::cp: return "cp";
        case TaskKind::ba: return "ba";
        case TaskKind::fi: return "fi";
        case TaskKind::ci: return "ci";
    }
    return {};
}

inline TaskKind parse_task(std::string_view s) {
    if (s == "cp") return TaskKind::cp;
    if (s == "ba") return TaskKind::ba;
    if (s == "fi") return TaskKind::fi;
    if (s == "ci") return TaskKind::ci;
    throw ValidationError("unknown task '" + std::string(s) + "'");
}

struct CausalPathsTruth {
    int cause = -1;
    int effect = -1;
    std::vector<Path> paths;

    bool operator==(const CausalPathsTruth&) const = default;
};

// Task-tagged answer payload. CP and BA cover every cause x effect pair;
// FI and CI cover every queried node.
struct GroundTruth {
    TaskKind task = TaskKind::cp;
    std::vector<CausalPathsTruth> cp;
    std::vector<AdjustmentGroundTruth> ba;
    Assignment states;

    bool operator==(const GroundTruth&) const = default;
};

struct QuestionRecord {
    std::string id;
    TaskKind task = TaskKind::cp;
    TieredDag graph;
    std::map<int, std::string> names;
    NameStyle name_style;
    std::optional<BoolScm> scm;
    std::optional<double> ce_d;
    std::optional<int> wi_n;
    uint64_t seed = 0;
    std::string question_text;
    GroundTruth ground_truth;
    ComplexityStats stats;
    Assignment observed;      // FI/CI: root states O
    Assignment interventions; // CI: what-if states C

    // Queried nodes Q: the lowest tier.
    std::vector<int> query_nodes() const {
        return graph.tier_nodes(graph.shape().tiers() - 1);
    }
};

// Maps the relative distance knob onto interior tiers 1..T-2: the cause
// sits at tier 1 and the effect d tiers below, d = max(1, round(ce_d*(T-3))).
// ce_d = 1 picks the farthest interior pair, 0 the closest.
inline std::pair<int, int> select_cause_effect_tiers(const GraphShape& shape, double ce_d) {
    shape.validate();
    if (!(ce_d >= 0.0 && ce_d <= 1.0)) throw ValidationError("ce_d must lie in [0,1]");
    int tiers = shape.tiers();
    if (tiers < 4) throw ValidationError("need at least 2 interior tiers for cause/effect");
    int d = static_cast<int>(std::floor(ce_d * (tiers - 3) + 0.5));
    if (d < 1) d = 1;
    return {1, 1 + d};
}

// Question prose templates. File format: task bodies under [cp], [ba],
// [fi], [ci] section headers, with placeholder slots {EDGES}, {FUNCTIONS},
// {OBSERVED}, {WHATIF}, {PAIRS} and {ANSWER_FORMAT}. Ground truth never
// depends on the template text.
struct QuestionTemplates {
    std::map<TaskKind, std::string> body;

    static QuestionTemplates parse(std::string_view text);
    static const QuestionTemplates& builtin();

    void validate() const {
        struct Need { TaskKind task; std::vector<const char*> slots; };
        static const std::vector<Need> needs = {
            {TaskKind::cp, {"{EDGES}", "{PAIRS}", "{ANSWER_FORMAT}"}},
            {TaskKind::ba, {"{EDGES}", "{PAIRS}", "{ANSWER_FORMAT}"}},
            {TaskKind::fi, {"{EDGES}", "{FUNCTIONS}", "{OBSERVED}", "{ANSWER_FORMAT}"}},
            {TaskKind::ci,
             {"{EDGES}", "{FUNCTIONS}", "{OBSERVED}", "{WHATIF}", "{ANSWER_FORMAT}"}},
        };
        for (const auto& need : needs) {
            auto it = body.find(need.task);
            if (it == body.end())
                throw ValidationError("missing template for task " + task_tag(need.task));
            for (const char* slot : need.slots)
                if (it->second.find(slot) == std::string::npos)
                    throw ValidationError("template for " + task_tag(need.task) +
                                          " lacks slot " + slot);
        }
    }
};

namespace detail {

// Splits "[name]" sections, preserving blank lines inside bodies.
inline std::map<std::string, std::string> parse_sections(std::string_view text) {
    std::map<std::string, std::string> out;
    std::string section;
    std::string body;
    auto flush = [&] {
        if (section.empty()) return;
        while (!body.empty() && (body.back() == '\n' || body.back() == ' ')) body.pop_back();
        size_t first = body.find_first_not_of('\n');
        out[section] = first == std::string::npos ? "" : body.substr(first);
        body.clear();
    };
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        size_t end = nl == std::string_view::npos ? text.size() : nl;
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.front() == '[' && line.back() == ']') {
            flush();
            section = std::string(line.substr(1, line.size() - 2));
        } else if (!section.empty()) {
            body += std::string(line);
            body += '\n';
        }
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    flush();
    return out;
}

inline std::string replace_slot(std::string text, std::string_view slot, std::string_view value) {
    for (size_t at = text.find(slot); at != std::string::npos; at = text.find(slot, at))
        text.replace(at, slot.size(), value), at += value.size();
    return text;
}

inline std::string expr_prose(const BoolExpr& e, const std::map<int, std::string>& names) {
    switch (e.op) {
        case BoolExpr::Op::leaf:
            return names.at(e.node) + (e.negated ? " does not happen" : " happens");
        case BoolExpr::Op::and_:
            return "(" + expr_prose(*e.lhs, names) + " and " + expr_prose(*e.rhs, names) + ")";
        case BoolExpr::Op::or_:
            return "(" + expr_prose(*e.lhs, names) + " or " + expr_prose(*e.rhs, names) + ")";
    }
    return {};
}

inline std::string edges_prose(const TieredDag& g, const std::map<int, std::string>& names) {
    std::string out;
    for (auto [u, v] : g.edges())
        out += names.at(u) + " has a causal effect on " + names.at(v) + ".\n";
    if (!out.empty()) out.pop_back();
    return out;
}

inline std::string functions_prose(const BoolScm& scm, const std::map<int, std::string>& names) {
    std::string out;
    for (int v : scm.graph.topological_order()) {
        auto it = scm.functions.find(v);
        if (it == scm.functions.end()) continue;
        out += names.at(v) + " happens if " + expr_prose(it->second, names) + ".\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

inline std::string observed_prose(const Assignment& observed,
                                  const std::map<int, std::string>& names) {
    std::string out;
    for (auto& [v, state] : observed)
        out += names.at(v) + (state ? " happened.\n" : " did not happen.\n");
    if (!out.empty()) out.pop_back();
    return out;
}

inline std::string whatif_prose(const Assignment& interventions,
                                const std::map<int, std::string>& names) {
    std::string out;
    for (auto& [v, state] : interventions)
        out += "What if " + names.at(v) + (state ? " had happened?\n" : " had not happened?\n");
    if (!out.empty()) out.pop_back();
    return out;
}

inline std::string pairs_prose(const std::vector<std::pair<int, int>>& pairs,
                               const std::map<int, std::string>& names) {
    std::string out;
    for (auto [c, e] : pairs)
        out += "- the effect of " + names.at(c) + " on " + names.at(e) + "\n";
    if (!out.empty()) out.pop_back();
    return out;
}

} // namespace detail

// The machine-parseable answer instruction every prompt ends with; the
// grammar is what the evaluation side parses.
inline std::string answer_format_instruction(const QuestionRecord& q) {
    switch (q.task) {
        case TaskKind::cp:
            return "When you are done, finish your reply with a line containing exactly "
                   "\"ANSWER:\" followed by one line per causal path, each written as "
                   "\"path: <name> -> <name> -> ... -> <name>\" using the phenomenon names "
                   "from the question. If there are no causal paths at all, write the single "
                   "line \"none\" after \"ANSWER:\".";
        case TaskKind::ba: {
            size_t pair_count = q.ground_truth.ba.size();
            std::string count = pair_count == 1 ? "exactly 1 line"
                                                : "exactly " + std::to_string(pair_count) + " lines";
            return "When you are done, finish your reply with a line containing exactly "
                   "\"ANSWER:\" followed by " + count +
                   ", one per requested pair in the order listed above, each written "
                   "as \"adjust: {<name>, <name>, ...}\" naming the phenomena to control, or "
                   "\"adjust: {}\" when controlling nothing is enough.";
        }
        case TaskKind::fi:
        case TaskKind::ci: {
            std::string queried;
            for (int v : q.query_nodes()) {
                if (!queried.empty()) queried += "; ";
                queried += q.names.at(v);
            }
            std::string lead =
                q.task == TaskKind::fi
                    ? "Determine whether each of the following happens: "
                    : "Determine whether each of the following happens in the hypothetical "
                      "situation: ";
            return lead + queried +
                   ". When you are done, finish your reply with a line containing exactly "
                   "\"ANSWER:\" followed by one line per queried phenomenon, each written as "
                   "\"<name>: happens\" or \"<name>: does not happen\".";
        }
    }
    return {};
}

// The canonical correct answer in the grammar above. Exemplar answers and
// the oracle-backed mock model use this rendering.
inline std::string render_answer_block(const QuestionRecord& q) {
    std::string out = "ANSWER:\n";
    switch (q.task) {
        case TaskKind::cp: {
            std::string lines;
            for (const auto& pair : q.ground_truth.cp)
                for (const Path& p : pair.paths) {
                    std::string line = "path: ";
                    for (size_t i = 0; i < p.nodes.size(); ++i) {
                        if (i) line += " -> ";
                        line += q.names.at(p.nodes[i]);
                    }
                    lines += line + "\n";
                }
            out += lines.empty() ? "none\n" : lines;
            break;
        }
        case TaskKind::ba:
            for (const auto& pair : q.ground_truth.ba) {
                if (pair.minimal_sets.empty())
                    throw ContractError("no valid adjustment set to render");
                std::string line = "adjust: {";
                const auto& z = pair.minimal_sets.front();
                bool first = true;
                for (int v : z) {
                    if (!first) line += ", ";
                    line += q.names.at(v);
                    first = false;
                }
                out += line + "}\n";
            }
            break;
        case TaskKind::fi:
        case TaskKind::ci:
            for (auto& [v, state] : q.ground_truth.states)
                out += q.names.at(v) + (state ? ": happens\n" : ": does not happen\n");
            break;
    }
    out.pop_back();
    return out;
}

namespace detail {

inline QuestionRecord base_record(TaskKind task, const TieredDag& g,
                                  const std::map<int, std::string>& names,
                                  const NameStyle& style) {
    QuestionRecord q{.id = {},
                     .task = task,
                     .graph = g,
                     .names = names,
                     .name_style = style,
                     .scm = {},
                     .ce_d = {},
                     .wi_n = {},
                     .seed = g.gen_params().seed,
                     .question_text = {},
                     .ground_truth = {},
                     .stats = complexity_stats(g),
                     .observed = {},
                     .interventions = {}};
    q.ground_truth.task = task;
    return q;
}

inline std::vector<std::pair<int, int>> tier_pairs(const TieredDag& g, int cause_tier,
                                                   int effect_tier) {
    if (cause_tier >= effect_tier) throw ValidationError("cause tier must lie above effect tier");
    std::vector<std::pair<int, int>> pairs;
    for (int c : g.tier_nodes(cause_tier))
        for (int e : g.tier_nodes(effect_tier)) pairs.emplace_back(c, e);
    return pairs;
}

} // namespace detail

// CP question over explicit cause/effect tiers. The ce_d overload below is
// the benchmark entry point; this one also serves tiny exemplar scenarios.
inline QuestionRecord build_cp_question_at(const TieredDag& g,
                                           const std::map<int, std::string>& names,
                                           const NameStyle& style, int cause_tier,
                                           int effect_tier,
                                           const QuestionTemplates& tmpl = QuestionTemplates::builtin()) {
    QuestionRecord q = detail::base_record(TaskKind::cp, g, names, style);
    auto pairs = detail::tier_pairs(g, cause_tier, effect_tier);
    for (auto [c, e] : pairs)
        q.ground_truth.cp.push_back({c, e, enumerate_causal_paths(g, c, e)});
    std::string text = tmpl.body.at(TaskKind::cp);
    text = detail::replace_slot(text, "{EDGES}", detail::edges_prose(g, names));
    text = detail::replace_slot(text, "{PAIRS}", detail::pairs_prose(pairs, names));
    text = detail::replace_slot(text, "{ANSWER_FORMAT}", answer_format_instruction(q));
    q.question_text = text;
    return q;
}

inline QuestionRecord build_cp_question(const TieredDag& g,
                                        const std::map<int, std::string>& names,
                                        const NameStyle& style, double ce_d,
                                        const QuestionTemplates& tmpl = QuestionTemplates::builtin()) {
    auto [ct, et] = select_cause_effect_tiers(g.shape(), ce_d);
    QuestionRecord q = build_cp_question_at(g, names, style, ct, et, tmpl);
    q.ce_d = ce_d;
    return q;
}

inline QuestionRecord build_ba_question_at(const TieredDag& g,
                                           const std::map<int, std::string>& names,
                                           const NameStyle& style, int cause_tier,
                                           int effect_tier,
                                           const QuestionTemplates& tmpl = QuestionTemplates::builtin(),
                                           const AdjustmentSearchLimits& limits = {}) {
    QuestionRecord q = detail::base_record(TaskKind::ba, g, names, style);
    auto pairs = detail::tier_pairs(g, cause_tier, effect_tier);
    for (auto [c, e] : pairs)
        q.ground_truth.ba.push_back(enumerate_minimal_adjustment_sets(g, c, e, limits));
    std::string text = tmpl.body.at(TaskKind::ba);
    text = detail::replace_slot(text, "{EDGES}", detail::edges_prose(g, names));
    text = detail::replace_slot(text, "{PAIRS}", detail::pairs_prose(pairs, names));
    text = detail::replace_slot(text, "{ANSWER_FORMAT}", answer_format_instruction(q));
    q.question_text = text;
    return q;
}

inline QuestionRecord build_ba_question(const TieredDag& g,
                                        const std::map<int, std::string>& names,
                                        const NameStyle& style, double ce_d,
                                        const QuestionTemplates& tmpl = QuestionTemplates::builtin(),
                                        const AdjustmentSearchLimits& limits = {}) {
    auto [ct, et] = select_cause_effect_tiers(g.shape(), ce_d);
    QuestionRecord q = build_ba_question_at(g, names, style, ct, et, tmpl, limits);
    q.ce_d = ce_d;
    return q;
}

// Root observations O for a question seed: one fair coin per tier-0 node,
// in id order, from Rng(seed).child("observed").
inline Assignment derive_observed(const TieredDag& g, uint64_t seed) {
    Assignment observed;
    Rng r = Rng(seed).child("observed");
    for (int v : g.tier_nodes(0)) observed[v] = r.bernoulli(0.5);
    return observed;
}

// What-if set C: wi_n distinct nodes drawn uniformly from nodes \ Q via
// Rng(seed).child("whatif").child(wi_n), each pinned to the negation of its
// factual value so the intervention is never vacuous.
inline Assignment derive_interventions(const BoolScm& scm, uint64_t seed, int wi_n) {
    const TieredDag& g = scm.graph;
    std::vector<int> candidates;
    int last_tier = g.shape().tiers() - 1;
    for (int v = 0; v < g.node_count(); ++v)
        if (g.tier_of(v) != last_tier) candidates.push_back(v);
    if (wi_n < 1 || wi_n > static_cast<int>(candidates.size()))
        throw ValidationError("wi_n must lie in [1, nodes - queried]");
    Rng r = Rng(seed).child("whatif").child(static_cast<uint64_t>(wi_n));
    for (int i = 0; i < wi_n; ++i) {
        size_t j = static_cast<size_t>(i) +
                   static_cast<size_t>(r.uniform(candidates.size() - static_cast<size_t>(i)));
        std::swap(candidates[static_cast<size_t>(i)], candidates[j]);
    }
    candidates.resize(static_cast<size_t>(wi_n));

    Assignment factual = evaluate_factual(scm, derive_observed(g, seed));
    Assignment interventions;
    for (int v : candidates) interventions[v] = !factual.at(v);
    return interventions;
}

inline QuestionRecord build_fi_question(const BoolScm& scm,
                                        const std::map<int, std::string>& names,
                                        const NameStyle& style, uint64_t seed,
                                        const QuestionTemplates& tmpl = QuestionTemplates::builtin()) {
    if (!scm.graph.is_closed())
        throw ContractError("FI questions need a closed graph (non-root tiers have parents)");
    QuestionRecord q = detail::base_record(TaskKind::fi, scm.graph, names, style);
    q.scm = scm;
    q.seed = seed;
    q.observed = derive_observed(scm.graph, seed);
    Assignment all = evaluate_factual(scm, q.observed);
    for (int v : q.query_nodes()) q.ground_truth.states[v] = all.at(v);
    std::string text = tmpl.body.at(TaskKind::fi);
    text = detail::replace_slot(text, "{EDGES}", detail::edges_prose(scm.graph, names));
    text = detail::replace_slot(text, "{FUNCTIONS}", detail::functions_prose(scm, names));
    text = detail::replace_slot(text, "{OBSERVED}", detail::observed_prose(q.observed, names));
    text = detail::replace_slot(text, "{ANSWER_FORMAT}", answer_format_instruction(q));
    q.question_text = text;
    return q;
}

inline QuestionRecord build_ci_question(const BoolScm& scm,
                                        const std::map<int, std::string>& names,
                                        const NameStyle& style, int wi_n, uint64_t seed,
                                        const QuestionTemplates& tmpl = QuestionTemplates::builtin()) {
    if (!scm.graph.is_closed())
        throw ContractError("CI questions need a closed graph (non-root tiers have parents)");
    QuestionRecord q = detail::base_record(TaskKind::ci, scm.graph, names, style);
    q.scm = scm;
    q.seed = seed;
    q.wi_n = wi_n;
    q.observed = derive_observed(scm.graph, seed);
    q.interventions = derive_interventions(scm, seed, wi_n);
    Assignment all = evaluate_counterfactual(scm, q.observed, q.interventions);
    for (int v : q.query_nodes()) q.ground_truth.states[v] = all.at(v);
    std::string text = tmpl.body.at(TaskKind::ci);
    text = detail::replace_slot(text, "{EDGES}", detail::edges_prose(scm.graph, names));
    text = detail::replace_slot(text, "{FUNCTIONS}", detail::functions_prose(scm, names));
    text = detail::replace_slot(text, "{OBSERVED}", detail::observed_prose(q.observed, names));
    text = detail::replace_slot(text, "{WHATIF}", detail::whatif_prose(q.interventions, names));
    text = detail::replace_slot(text, "{ANSWER_FORMAT}", answer_format_instruction(q));
    q.question_text = text;
    return q;
}

struct FilterCaps {
    int max_paths_per_pair = 20;
    int max_total_paths = 60;
};

// Keep a CP/BA question only when every pair's causal-path count is within
// the per-pair cap and their sum within the total cap.
inline bool complexity_filter(const QuestionRecord& q, const FilterCaps& caps = {}) {
    if (q.task != TaskKind::cp && q.task != TaskKind::ba)
        throw ContractError("complexity filter applies to CP/BA questions only");
    long total = 0;
    auto check = [&](long count) {
        total += count;
        return count <= caps.max_paths_per_pair;
    };
    if (q.task == TaskKind::cp) {
        for (const auto& pair : q.ground_truth.cp)
            if (!check(static_cast<long>(pair.paths.size()))) return false;
    } else {
        for (const auto& pair : q.ground_truth.ba)
            if (!check(static_cast<long>(
                    enumerate_causal_paths(q.graph, pair.treatment, pair.outcome).size())))
                return false;
    }
    return total <= caps.max_total_paths;
}

inline QuestionTemplates QuestionTemplates::parse(std::string_view text) {
    QuestionTemplates tmpl;
    for (auto& [name, body] : detail::parse_sections(text)) {
        if (name == "meta") continue;
        tmpl.body[parse_task(name)] = body;
    }
    tmpl.validate();
    return tmpl;
}

inline const QuestionTemplates& QuestionTemplates::builtin() {
    static const QuestionTemplates tmpl = QuestionTemplates::parse(R"tmpl(
[meta]
version 1

[cp]
In a recent research project, scientists studied a set of previously unknown phenomena and established the causal relations between them through careful experiments:

{EDGES}

We want to estimate the causal effect of some of these phenomena on others:

{PAIRS}

For each pair, find all causal paths from the first phenomenon to the second. A causal path follows the stated causal relations in their given direction only.

{ANSWER_FORMAT}

[ba]
In a recent research project, scientists studied a set of previously unknown phenomena and established the causal relations between them through careful experiments:

{EDGES}

We want to estimate the causal effect of some of these phenomena on others:

{PAIRS}

For each pair, give a backdoor adjustment set: a set of phenomena to control so that every backdoor path between the pair is blocked while no non-causal information flow is opened.

{ANSWER_FORMAT}

[fi]
In a recent research project, scientists studied a set of previously unknown phenomena and established the causal relations between them through careful experiments:

{EDGES}

Each phenomenon either happens or does not happen. The experiments established exact rules: a phenomenon with a stated rule happens precisely when its condition holds, and does not happen otherwise.

{FUNCTIONS}

The researchers observed the following:

{OBSERVED}

{ANSWER_FORMAT}

[ci]
In a recent research project, scientists studied a set of previously unknown phenomena and established the causal relations between them through careful experiments:

{EDGES}

Each phenomenon either happens or does not happen. The experiments established exact rules: a phenomenon with a stated rule happens precisely when its condition holds, and does not happen otherwise.

{FUNCTIONS}

The researchers observed the following:

{OBSERVED}

Now consider a hypothetical situation in which some events had gone differently. A phenomenon named in a what-if clause is fixed to the stated state and no longer follows its rule; everything else keeps its rule, and unaffected observations stay as they were.

{WHATIF}

{ANSWER_FORMAT}
)tmpl");
    return tmpl;
}

} // namespace cbench
