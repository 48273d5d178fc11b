#include <catch2/catch_amalgamated.hpp>

#include "cbench/prompt.hpp"

using namespace cbench;

namespace {

QuestionRecord sample_question(TaskKind task) {
    auto g = generate_graph(GraphShape{{1, 1, 1, 1, 1}}, 4, {0.1, 0.1, 0.1}, 1301);
    auto names = assign_names(g, NameStyle{}, TermLexicon::builtin(), 1301);
    switch (task) {
        case TaskKind::cp: return build_cp_question(g, names, NameStyle{}, 1.0);
        case TaskKind::ba: return build_ba_question(g, names, NameStyle{}, 1.0);
        case TaskKind::fi: return build_fi_question(generate_functions(g, 1301), names, NameStyle{}, 1301);
        case TaskKind::ci:
            return build_ci_question(generate_functions(g, 1301), names, NameStyle{}, 2, 1301);
    }
    throw std::logic_error("unreachable");
}

size_t count_occurrences(const std::string& text, const std::string& needle) {
    size_t n = 0;
    for (size_t at = text.find(needle); at != std::string::npos; at = text.find(needle, at + 1))
        ++n;
    return n;
}

} // namespace

TEST_CASE("style parsing covers all seven styles") {
    REQUIRE(PromptStyle::all().size() == 7);
    for (const PromptStyle& s : PromptStyle::all()) REQUIRE(PromptStyle::parse(s.tag()) == s);
    REQUIRE_THROWS_AS(PromptStyle::parse("3-shot"), ValidationError);
    PromptStyle bad{PromptStyle::Kind::icl, 3};
    REQUIRE_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("builtin exemplar bank loads and verifies") {
    const ExemplarBank& bank = ExemplarBank::builtin();
    for (TaskKind t : {TaskKind::cp, TaskKind::ba, TaskKind::fi, TaskKind::ci}) {
        for (int i = 0; i < 2; ++i) {
            const Exemplar& ex = bank.get(t, i);
            REQUIRE(ex.record.task == t);
            REQUIRE(ex.answer_text.starts_with("ANSWER:"));
            REQUIRE(!ex.cot_text.empty());
        }
    }
    // 1-shot scenarios have single-node cause/effect tiers and singleton O/Q/C
    REQUIRE(bank.get(TaskKind::cp, 0).ground_truth.cp.size() == 1);
    REQUIRE(bank.get(TaskKind::ba, 0).ground_truth.ba.size() == 1);
    REQUIRE(bank.get(TaskKind::fi, 0).observed.size() == 1);
    REQUIRE(bank.get(TaskKind::fi, 0).ground_truth.states.size() == 1);
    REQUIRE(bank.get(TaskKind::ci, 0).interventions.size() == 1);
    // 2-shot scenarios widen everything to two nodes
    REQUIRE(bank.get(TaskKind::cp, 1).ground_truth.cp.size() == 4);
    REQUIRE(bank.get(TaskKind::ci, 1).interventions.size() == 2);
}

TEST_CASE("malformed bank specs are rejected") {
    REQUIRE_THROWS_AS(ExemplarBank::from_json("{ not json"), ParseError);
    REQUIRE_THROWS_AS(ExemplarBank::from_json("{}"), nlohmann::json::exception);
}

TEST_CASE("ICL prompts carry the right number of exemplar blocks") {
    auto q = sample_question(TaskKind::cp);
    for (int k : {1, 2}) {
        std::string prompt = render_prompt(q, PromptStyle{PromptStyle::Kind::icl, k});
        REQUIRE(count_occurrences(prompt, "Example question:") == static_cast<size_t>(k));
        REQUIRE(count_occurrences(prompt, "Example answer:") == static_cast<size_t>(k));
        REQUIRE(count_occurrences(prompt, "Example solution:") == 0);
        REQUIRE(prompt.find("Now solve the following question.") != std::string::npos);
    }
}

TEST_CASE("CoT prompts include reasoning, zero-shot CoT only the elicitation") {
    auto q = sample_question(TaskKind::fi);
    std::string cot0 = render_prompt(q, PromptStyle{PromptStyle::Kind::cot, 0});
    REQUIRE(count_occurrences(cot0, "Example question:") == 0);
    REQUIRE(cot0.find("Let's think step by step") != std::string::npos);

    std::string cot2 = render_prompt(q, PromptStyle{PromptStyle::Kind::cot, 2});
    REQUIRE(count_occurrences(cot2, "Example question:") == 2);
    REQUIRE(count_occurrences(cot2, "Example solution:") == 2);
    REQUIRE(count_occurrences(cot2, "Step 1.") == 2);
}

TEST_CASE("mistake hint prompts prepend the task caution block") {
    for (TaskKind t : {TaskKind::cp, TaskKind::ba, TaskKind::fi, TaskKind::ci}) {
        auto q = sample_question(t);
        std::string prompt = render_prompt(q, PromptStyle{PromptStyle::Kind::mistake_hint, 0});
        REQUIRE(prompt.starts_with("Be careful to avoid these common mistakes"));
        REQUIRE(prompt.find(q.question_text) != std::string::npos);
    }
    REQUIRE(mistake_hint(TaskKind::ba).find("collider") != std::string::npos);
    REQUIRE(mistake_hint(TaskKind::ci).find("sever") != std::string::npos);
}

TEST_CASE("prompt length grows with shots") {
    for (TaskKind t : {TaskKind::cp, TaskKind::ba, TaskKind::fi, TaskKind::ci}) {
        auto q = sample_question(t);
        size_t zero = render_prompt(q, PromptStyle{}).size();
        size_t icl1 = render_prompt(q, PromptStyle{PromptStyle::Kind::icl, 1}).size();
        size_t icl2 = render_prompt(q, PromptStyle{PromptStyle::Kind::icl, 2}).size();
        REQUIRE(icl2 > icl1);
        REQUIRE(icl1 > zero);
    }
}

TEST_CASE("prompts are byte-deterministic") {
    auto q = sample_question(TaskKind::ci);
    for (const PromptStyle& s : PromptStyle::all())
        REQUIRE(render_prompt(q, s) == render_prompt(q, s));
}

TEST_CASE("every prompt ends with the answer block instruction") {
    for (TaskKind t : {TaskKind::cp, TaskKind::ba, TaskKind::fi, TaskKind::ci}) {
        auto q = sample_question(t);
        std::string tail = answer_format_instruction(q);
        for (const PromptStyle& s : PromptStyle::all()) {
            std::string prompt = render_prompt(q, s);
            if (s.kind == PromptStyle::Kind::cot && s.shots == 0)
                REQUIRE(prompt.ends_with("exactly as instructed above."));
            else
                REQUIRE(prompt.ends_with(tail));
        }
    }
}

TEST_CASE("exemplar names never collide with question names") {
    // astronomically unlikely by construction; exercised via the guard itself
    auto q = sample_question(TaskKind::cp);
    const ExemplarBank& bank = ExemplarBank::builtin();
    q.names[0] = bank.get(TaskKind::cp, 0).record.names.at(0);
    REQUIRE_THROWS_AS(render_prompt(q, PromptStyle{PromptStyle::Kind::icl, 1}), ContractError);
}
