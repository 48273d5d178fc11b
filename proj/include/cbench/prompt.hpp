#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbench/errors.hpp"
#include "cbench/question.hpp"

namespace cbench {

// The seven prompt styles: plain question, worked examples with answers
// only (ICL), step-by-step reasoning (CoT), and a pre-answer caution list.
struct PromptStyle {
    enum class Kind { zero_shot, icl, cot, mistake_hint };

    Kind kind = Kind::zero_shot;
    int shots = 0;

    void validate() const {
        if (kind == Kind::icl && (shots < 1 || shots > 2))
            throw ValidationError("ICL prompts take 1 or 2 shots");
        if (kind == Kind::cot && (shots < 0 || shots > 2))
            throw ValidationError("CoT prompts take 0 to 2 shots");
    }

    std::string tag() const {
        switch (kind) {
            case Kind::zero_shot: return "0-shot";
            case Kind::icl: return std::to_string(shots) + "-shot";
            case Kind::cot: return std::to_string(shots) + "-cot";
            case Kind::mistake_hint: return "mis-hint";
        }
        return {};
    }

    static PromptStyle parse(std::string_view text) {
        for (const PromptStyle& s : all())
            if (s.tag() == text) return s;
        throw ValidationError("unknown prompt style '" + std::string(text) + "'");
    }

    static const std::vector<PromptStyle>& all() {
        static const std::vector<PromptStyle> styles = {
            {Kind::zero_shot, 0}, {Kind::icl, 1},  {Kind::icl, 2},         {Kind::cot, 0},
            {Kind::cot, 1},       {Kind::cot, 2},  {Kind::mistake_hint, 0}};
        return styles;
    }

    bool operator==(const PromptStyle&) const = default;
};

inline std::string mistake_hint(TaskKind task) {
    std::string out = "Be careful to avoid these common mistakes, and check your work before "
                      "giving the final answer:\n";
    switch (task) {
        case TaskKind::cp:
            out += "- Do not omit any correct causal path.\n"
                   "- Do not invent causal relations that were not stated, and do not include "
                   "paths that rely on them.";
            break;
        case TaskKind::ba:
            out += "- Do not control a collider on a backdoor path: controlling it opens the "
                   "path instead of blocking it.\n"
                   "- Do not control any descendant of the cause.\n"
                   "- Make sure every backdoor path is blocked.";
            break;
        case TaskKind::fi:
            out += "- Evaluate the rules in dependency order: apply a rule only once the states "
                   "it depends on are known.\n"
                   "- Apply each rule exactly as stated, including negations.";
            break;
        case TaskKind::ci:
            out += "- First sever the rules of the what-if phenomena: a what-if phenomenon keeps "
                   "its assumed state regardless of its rule.\n"
                   "- Evaluate the remaining rules in dependency order, using the assumed states "
                   "where they apply.\n"
                   "- Apply each rule exactly as stated, including negations.";
            break;
    }
    return out;
}

namespace detail {

inline std::string arrow_path(const Path& p, const std::map<int, std::string>& names) {
    std::string out = names.at(p.nodes[0]);
    for (size_t k = 0; k < p.dirs.size(); ++k) {
        out += p.dirs[k] == Dir::forward ? " -> " : " <- ";
        out += names.at(p.nodes[k + 1]);
    }
    return out;
}

inline std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

inline std::string cot_cp(const QuestionRecord& q) {
    std::string out = "Step 1. List the direct causal links leaving each phenomenon.\n";
    for (int v : q.graph.topological_order()) {
        if (q.graph.children(v).empty()) continue;
        std::vector<std::string> kids;
        for (int w : q.graph.children(v)) kids.push_back(q.names.at(w));
        out += "- " + q.names.at(v) + " leads to: " + join(kids, ", ") + ".\n";
    }
    out += "Step 2. For each requested pair, walk forward from the cause toward the effect, "
           "never revisiting a phenomenon.\n";
    for (const auto& pair : q.ground_truth.cp) {
        out += "- from " + q.names.at(pair.cause) + " to " + q.names.at(pair.effect) + ": ";
        if (pair.paths.empty()) {
            out += "no forward path exists.\n";
        } else {
            std::vector<std::string> rendered;
            for (const Path& p : pair.paths) rendered.push_back(arrow_path(p, q.names));
            out += "the complete forward paths are " + join(rendered, "; ") + ".\n";
        }
    }
    out += "Step 3. Collect every complete path into the answer.";
    return out;
}

inline std::string cot_ba(const QuestionRecord& q) {
    std::string out = "Step 1. For each pair, list the backdoor paths: the paths whose first "
                      "step enters the cause.\n";
    for (const auto& pair : q.ground_truth.ba) {
        auto paths = enumerate_backdoor_paths(q.graph, pair.treatment, pair.outcome);
        out += "- from " + q.names.at(pair.treatment) + " to " + q.names.at(pair.outcome) + ": ";
        if (paths.empty()) {
            out += "none.\n";
        } else {
            std::vector<std::string> rendered;
            for (const Path& p : paths) rendered.push_back(arrow_path(p, q.names));
            out += join(rendered, "; ") + ".\n";
        }
    }
    out += "Step 2. Controlling the middle of a chain or fork blocks its path; a collider "
           "already blocks its path unless it or one of its descendants is controlled; never "
           "control a descendant of the cause.\n"
           "Step 3. For each pair, choose a smallest set of controls that blocks every backdoor "
           "path.\n";
    for (const auto& pair : q.ground_truth.ba) {
        out += "- from " + q.names.at(pair.treatment) + " to " + q.names.at(pair.outcome) + ": ";
        const auto& z = pair.minimal_sets.front();
        if (z.empty()) {
            out += "every backdoor path is already blocked, control nothing.\n";
        } else {
            std::vector<std::string> members;
            for (int v : z) members.push_back(q.names.at(v));
            out += "control " + join(members, ", ") + ".\n";
        }
    }
    out.pop_back();
    return out;
}

inline std::string cot_rule_lines(const QuestionRecord& q, const Assignment& values,
                                  const Assignment& pinned) {
    std::string out;
    const BoolScm& scm = *q.scm;
    for (int v : q.graph.topological_order()) {
        if (pinned.count(v)) {
            out += "- " + q.names.at(v) + " is fixed to " +
                   (pinned.at(v) ? "happen" : "not happen") + ".\n";
            continue;
        }
        auto it = scm.functions.find(v);
        if (it == scm.functions.end()) continue;
        bool value = values.at(v);
        out += "- " + q.names.at(v) + ": the condition \"" + expr_prose(it->second, q.names) +
               "\" is " + (value ? "met" : "not met") + ", so it " +
               (value ? "happens" : "does not happen") + ".\n";
    }
    return out;
}

inline std::string cot_read_off(const QuestionRecord& q) {
    std::vector<std::string> parts;
    for (auto& [v, state] : q.ground_truth.states)
        parts.push_back(q.names.at(v) + (state ? " happens" : " does not happen"));
    return join(parts, "; ") + ".";
}

inline std::string cot_fi(const QuestionRecord& q) {
    std::vector<std::string> obs;
    for (auto& [v, state] : q.observed)
        obs.push_back(q.names.at(v) + (state ? " happened" : " did not happen"));
    std::string out = "Step 1. Note the observations: " + join(obs, "; ") + ".\n";
    out += "Step 2. Apply each rule in dependency order.\n";
    out += cot_rule_lines(q, evaluate_factual(*q.scm, q.observed), {});
    out += "Step 3. Read off the queried phenomena: " + cot_read_off(q);
    return out;
}

inline std::string cot_ci(const QuestionRecord& q) {
    std::vector<std::string> fixed;
    for (auto& [v, state] : q.interventions)
        fixed.push_back(q.names.at(v) + " is fixed to " + (state ? "happen" : "not happen") +
                        " and its own rule is ignored");
    std::string out = "Step 1. Apply the what-if changes: " + join(fixed, "; ") + ".\n";
    std::vector<std::string> obs;
    for (auto& [v, state] : q.observed)
        if (!q.interventions.count(v))
            obs.push_back(q.names.at(v) + (state ? " happened" : " did not happen"));
    out += "Step 2. Keep the remaining observations: " +
           (obs.empty() ? std::string("none remain") : join(obs, "; ")) + ".\n";
    out += "Step 3. Re-evaluate the rules in dependency order with the fixed states.\n";
    out += cot_rule_lines(q, evaluate_counterfactual(*q.scm, q.observed, q.interventions),
                          q.interventions);
    out += "Step 4. Read off the queried phenomena: " + cot_read_off(q);
    return out;
}

} // namespace detail

// Deterministic step-by-step solution text for an exemplar record.
inline std::string cot_walkthrough(const QuestionRecord& q) {
    switch (q.task) {
        case TaskKind::cp: return detail::cot_cp(q);
        case TaskKind::ba: return detail::cot_ba(q);
        case TaskKind::fi: return detail::cot_fi(q);
        case TaskKind::ci: return detail::cot_ci(q);
    }
    return {};
}

struct Exemplar {
    QuestionRecord record;
    std::string cot_text;
    std::string answer_text;
};

// Worked examples per task: index 0 is the one-node scenario used for
// 1-shot prompts, index 1 the two-node addition for 2-shot prompts. The
// bank file is JSON with per-task generation parameters; scenarios are
// rebuilt from their pinned seeds and re-verified against the oracles at
// load, so drift in templates or solvers cannot go unnoticed.
class ExemplarBank {
  public:
    static ExemplarBank from_json(std::string_view text);
    static const ExemplarBank& builtin();

    const Exemplar& get(TaskKind task, int index) const {
        return exemplars_.at(task).at(static_cast<size_t>(index));
    }

  private:
    std::map<TaskKind, std::vector<Exemplar>> exemplars_;
};

namespace detail {

inline void verify_exemplar(const Exemplar& ex) {
    const QuestionRecord& q = ex.record;
    switch (q.task) {
        case TaskKind::cp:
            for (const auto& pair : q.ground_truth.cp)
                if (enumerate_causal_paths(q.graph, pair.cause, pair.effect) != pair.paths)
                    throw ValidationError("exemplar CP answer disagrees with the path oracle");
            break;
        case TaskKind::ba:
            for (const auto& pair : q.ground_truth.ba) {
                auto truth = enumerate_minimal_adjustment_sets(q.graph, pair.treatment, pair.outcome);
                if (truth.minimal_sets != pair.minimal_sets)
                    throw ValidationError("exemplar BA answer disagrees with the adjustment oracle");
                if (pair.minimal_sets.empty())
                    throw ValidationError("exemplar BA pair has no valid adjustment set");
            }
            break;
        case TaskKind::fi:
        case TaskKind::ci: {
            Assignment all = q.task == TaskKind::fi
                                 ? evaluate_factual(*q.scm, q.observed)
                                 : evaluate_counterfactual(*q.scm, q.observed, q.interventions);
            for (auto& [v, state] : q.ground_truth.states)
                if (all.at(v) != state)
                    throw ValidationError("exemplar answer disagrees with the SCM evaluator");
            break;
        }
    }
    if (ex.answer_text != render_answer_block(q))
        throw ValidationError("exemplar answer text is stale");
}

} // namespace detail

inline ExemplarBank ExemplarBank::from_json(std::string_view text) {
    nlohmann::json spec;
    try {
        spec = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("exemplar bank: ") + e.what());
    }
    ExemplarBank bank;
    for (TaskKind task : {TaskKind::cp, TaskKind::ba, TaskKind::fi, TaskKind::ci}) {
        const auto& per_task = spec.at(task_tag(task));
        std::vector<Exemplar> pair;
        for (int slot = 0; slot < 2; ++slot) {
            const auto& e = per_task.at(slot == 0 ? "1shot" : "2shot");
            GraphShape shape = GraphShape::parse(e.at("shape").get<std::string>());
            uint64_t seed = e.at("seed").get<uint64_t>();
            int iterations = e.value("iterations", 2);
            JunctionProbabilities probs{e.value("p", 0.3), e.value("p", 0.3), e.value("p", 0.3)};
            TieredDag g = generate_graph(shape, iterations, probs, seed);
            auto names = assign_names(g, NameStyle{}, TermLexicon::builtin(), seed);
            QuestionRecord q = [&] {
                switch (task) {
                    case TaskKind::cp:
                        return build_cp_question_at(g, names, NameStyle{},
                                                    e.at("cause_tier").get<int>(),
                                                    e.at("effect_tier").get<int>());
                    case TaskKind::ba:
                        return build_ba_question_at(g, names, NameStyle{},
                                                    e.at("cause_tier").get<int>(),
                                                    e.at("effect_tier").get<int>());
                    case TaskKind::fi: {
                        auto scm = generate_functions(g, seed);
                        return build_fi_question(scm, names, NameStyle{}, seed);
                    }
                    case TaskKind::ci: {
                        auto scm = generate_functions(g, seed);
                        return build_ci_question(scm, names, NameStyle{}, e.at("wi_n").get<int>(),
                                                 seed);
                    }
                }
                throw ValidationError("unreachable");
            }();
            q.id = "exemplar-" + task_tag(task) + "-" + (slot == 0 ? "1shot" : "2shot");
            Exemplar ex{q, cot_walkthrough(q), render_answer_block(q)};
            detail::verify_exemplar(ex);
            pair.push_back(std::move(ex));
        }
        bank.exemplars_.emplace(task, std::move(pair));
    }
    return bank;
}

inline const ExemplarBank& ExemplarBank::builtin() {
    static const ExemplarBank bank = ExemplarBank::from_json(R"json({
  "cp": {
    "1shot": {"shape": "1x3", "seed": 9101, "cause_tier": 0, "effect_tier": 2},
    "2shot": {"shape": "2x3", "seed": 9102, "cause_tier": 0, "effect_tier": 2}
  },
  "ba": {
    "1shot": {"shape": "1x4", "seed": 9203, "cause_tier": 1, "effect_tier": 3},
    "2shot": {"shape": "2x4", "seed": 9204, "cause_tier": 1, "effect_tier": 3}
  },
  "fi": {
    "1shot": {"shape": "1x3", "seed": 9305},
    "2shot": {"shape": "2x3", "seed": 9306}
  },
  "ci": {
    "1shot": {"shape": "1x3", "seed": 9407, "wi_n": 1},
    "2shot": {"shape": "2x3", "seed": 9408, "wi_n": 2}
  }
})json");
    return bank;
}

// Renders the full prompt for one question. Every variant ends with the
// machine-parseable ANSWER block instruction (it closes the question text);
// exemplars, cautions and the step-by-step elicitation wrap around it.
inline std::string render_prompt(const QuestionRecord& q, const PromptStyle& style,
                                 const ExemplarBank& bank = ExemplarBank::builtin()) {
    style.validate();
    std::string out;

    int shots = (style.kind == PromptStyle::Kind::icl || style.kind == PromptStyle::Kind::cot)
                    ? style.shots
                    : 0;
    for (int i = 0; i < shots; ++i) {
        const Exemplar& ex = bank.get(q.task, i);
        for (auto& [v, name] : ex.record.names)
            for (auto& [w, qname] : q.names)
                if (name == qname)
                    throw ContractError("exemplar shares the node name '" + name +
                                        "' with the question");
        out += "Example question:\n" + ex.record.question_text + "\n\n";
        if (style.kind == PromptStyle::Kind::cot)
            out += "Example solution:\n" + ex.cot_text + "\n\n" + ex.answer_text + "\n\n";
        else
            out += "Example answer:\n" + ex.answer_text + "\n\n";
    }
    if (shots > 0) out += "Now solve the following question.\n\n";

    if (style.kind == PromptStyle::Kind::mistake_hint) out += mistake_hint(q.task) + "\n\n";

    out += q.question_text;

    if (style.kind == PromptStyle::Kind::cot && style.shots == 0)
        out += "\n\nLet's think step by step, then finish with the ANSWER block exactly as "
               "instructed above.";
    return out;
}

} // namespace cbench
