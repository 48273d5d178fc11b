#include <catch2/catch_amalgamated.hpp>

#include <filesystem>

#include "cbench/eval.hpp"

using namespace cbench;
namespace fs = std::filesystem;

namespace {

std::vector<QuestionRecord> tiny_bench() {
    std::vector<QuestionRecord> records;
    int counter = 0;
    for (uint64_t seed : {401ull, 402ull}) {
        auto g = generate_graph(GraphShape{{1, 1, 1, 1, 1}}, 4, {0.1, 0.1, 0.1}, seed);
        auto names = assign_names(g, NameStyle{}, TermLexicon::builtin(), seed);
        auto scm = generate_functions(g, seed);
        auto cp = build_cp_question(g, names, NameStyle{}, 1.0);
        auto ba = build_ba_question(g, names, NameStyle{}, 1.0);
        auto fi = build_fi_question(scm, names, NameStyle{}, seed);
        auto ci = build_ci_question(scm, names, NameStyle{}, 1, seed);
        for (QuestionRecord* q : {&cp, &ba, &fi, &ci}) {
            q->id = task_tag(q->task) + "-" + std::to_string(counter++);
            records.push_back(*q);
        }
    }
    return records;
}

// Scripted transport: replays a fixed status/body sequence and counts calls.
class ScriptedTransport : public Transport {
  public:
    explicit ScriptedTransport(std::vector<HttpResponse> script) : script_(std::move(script)) {}

    HttpResponse post(const HttpRequest& request) override {
        last_request = request;
        ++calls;
        if (script_.empty()) throw std::logic_error("script exhausted");
        HttpResponse r = script_.front();
        if (script_.size() > 1) script_.erase(script_.begin());
        return r;
    }

    int calls = 0;
    HttpRequest last_request;

  private:
    std::vector<HttpResponse> script_;
};

HttpResponse ok_completion(const std::string& content) {
    json body;
    body["choices"] = json::array({json{{"message", json{{"content", content}}}}});
    return HttpResponse{true, 200, body.dump(), ""};
}

ModelEndpoint test_endpoint() {
    ModelEndpoint e;
    e.base_url = "http://localhost:9";
    e.model = "test-model";
    e.auth_env = "";
    e.requests_per_minute = 1e9;
    e.backoff_ms = 1;
    return e;
}

} // namespace

TEST_CASE("answer extraction on the grammar archetypes") {
    auto cp = extract_answer("thinking...\nANSWER:\npath: a -> b -> c", TaskKind::cp);
    REQUIRE(cp);
    REQUIRE(cp->paths == std::vector<std::vector<std::string>>{{"a", "b", "c"}});

    auto none = extract_answer("ANSWER:\nnone", TaskKind::cp);
    REQUIRE(none);
    REQUIRE(none->cp_none);

    auto ba = extract_answer("ANSWER:\nadjust: {}", TaskKind::ba);
    REQUIRE(ba);
    REQUIRE(ba->adjust_sets == std::vector<std::vector<std::string>>{{}});

    auto ba2 = extract_answer("ANSWER:\nadjust: {x y, z}\nadjust: {}", TaskKind::ba);
    REQUIRE(ba2);
    REQUIRE(ba2->adjust_sets.size() == 2);
    REQUIRE(ba2->adjust_sets[0] == std::vector<std::string>{"x y", "z"});

    auto fi = extract_answer("ANSWER:\nfoo bar: happens\nbaz: does not happen", TaskKind::fi);
    REQUIRE(fi);
    REQUIRE(fi->states.at("foo bar") == true);
    REQUIRE(fi->states.at("baz") == false);

    REQUIRE(!extract_answer("no block at all, just vibes", TaskKind::cp));
    REQUIRE(!extract_answer("ANSWER:\nnot a grammar line", TaskKind::cp));
    REQUIRE(!extract_answer("ANSWER:\n", TaskKind::fi));
    REQUIRE(!extract_answer("ANSWER:\nfoo: maybe happens", TaskKind::fi));
}

TEST_CASE("extraction uses the final ANSWER block and tolerates case and spacing") {
    std::string raw = "ANSWER:\npath: wrong -> earlier\nmore thinking\nanswer:\n  PATH:  a ->  b";
    auto parsed = extract_answer(raw, TaskKind::cp);
    REQUIRE(parsed);
    REQUIRE(parsed->paths == std::vector<std::vector<std::string>>{{"a", "b"}});

    auto inline_first = extract_answer("ANSWER: path: a -> b", TaskKind::cp);
    REQUIRE(inline_first);
    REQUIRE(inline_first->paths.size() == 1);
}

TEST_CASE("scoring the spec archetypes") {
    auto records = tiny_bench();
    for (const QuestionRecord& q : records) {
        auto perfect = extract_answer(render_answer_block(q), q.task);
        REQUIRE(perfect);
        REQUIRE(score(perfect, q) == Verdict::correct);
        REQUIRE(score(std::nullopt, q) == Verdict::unparsed);
    }
}

TEST_CASE("CP scoring is order-insensitive but set-exact") {
    TieredDag diamond(GraphShape{{1, 2, 1}}, {{0, 1}, {0, 2}, {1, 3}, {2, 3}});
    std::map<int, std::string> names{{0, "aa"}, {1, "bb"}, {2, "cc"}, {3, "dd"}};
    auto q = build_cp_question_at(diamond, names, NameStyle{}, 0, 2);
    q.id = "diamond";
    auto reversed = extract_answer("ANSWER:\npath: aa -> cc -> dd\npath: aa -> bb -> dd",
                                   TaskKind::cp);
    REQUIRE(score(reversed, q) == Verdict::correct);
    auto missing = extract_answer("ANSWER:\npath: aa -> bb -> dd", TaskKind::cp);
    REQUIRE(score(missing, q) == Verdict::incorrect);
    auto invented = extract_answer(
        "ANSWER:\npath: aa -> bb -> dd\npath: aa -> cc -> dd\npath: bb -> dd", TaskKind::cp);
    REQUIRE(score(invented, q) == Verdict::incorrect);
    auto unknown = extract_answer("ANSWER:\npath: aa -> zz -> dd", TaskKind::cp);
    REQUIRE(score(unknown, q) == Verdict::incorrect);
}

TEST_CASE("BA scoring accepts any minimal set and the validity mode accepts valid supersets") {
    // u -> x, u -> w, w -> y, x -> y: both {u} and {w} are minimal
    TieredDag g(GraphShape{{1, 1, 1, 1}}, {{0, 1}, {0, 2}, {2, 3}, {1, 3}});
    std::map<int, std::string> names{{0, "uu"}, {1, "xx"}, {2, "ww"}, {3, "yy"}};
    auto q = build_ba_question_at(g, names, NameStyle{}, 1, 3);
    q.id = "ba";
    REQUIRE(q.ground_truth.ba[0].minimal_sets.size() == 2);

    for (const char* answer : {"ANSWER:\nadjust: {uu}", "ANSWER:\nadjust: {ww}"})
        REQUIRE(score(extract_answer(answer, TaskKind::ba), q) == Verdict::correct);

    auto superset = extract_answer("ANSWER:\nadjust: {uu, ww}", TaskKind::ba);
    REQUIRE(score(superset, q, BaMode::match_minimal) == Verdict::incorrect);
    REQUIRE(score(superset, q, BaMode::validity_check) == Verdict::correct);

    auto empty = extract_answer("ANSWER:\nadjust: {}", TaskKind::ba);
    REQUIRE(score(empty, q, BaMode::match_minimal) == Verdict::incorrect);
    REQUIRE(score(empty, q, BaMode::validity_check) == Verdict::incorrect);

    auto with_treatment = extract_answer("ANSWER:\nadjust: {xx}", TaskKind::ba);
    REQUIRE(score(with_treatment, q, BaMode::validity_check) == Verdict::incorrect);
}

TEST_CASE("FI scoring needs every queried node right") {
    TieredDag g(GraphShape{{2, 2}}, {{0, 2}, {1, 3}});
    BoolScm scm{g, {}};
    scm.functions.emplace(2, BoolExpr::leaf(0, false));
    scm.functions.emplace(3, BoolExpr::leaf(1, false));
    std::map<int, std::string> names{{0, "aa"}, {1, "bb"}, {2, "cc"}, {3, "dd"}};
    auto q = build_fi_question(scm, names, NameStyle{}, 12);
    q.id = "fi";
    std::string good = render_answer_block(q);
    REQUIRE(score(extract_answer(good, TaskKind::fi), q) == Verdict::correct);
    // flip one of the two queried states
    bool cc = q.ground_truth.states.at(2);
    std::string half = "ANSWER:\ncc: " + std::string(!cc ? "happens" : "does not happen") +
                       "\ndd: " + (q.ground_truth.states.at(3) ? "happens" : "does not happen");
    REQUIRE(score(extract_answer(half, TaskKind::fi), q) == Verdict::incorrect);
}

TEST_CASE("mock clients behave as advertised") {
    auto records = tiny_bench();
    OracleMockClient oracle;
    NegatingMockClient negating;
    GarbageMockClient garbage;
    for (const QuestionRecord& q : records) {
        REQUIRE(score(extract_answer(oracle.complete(q, ""), q.task), q) == Verdict::correct);
        REQUIRE(!extract_answer(garbage.complete(q, ""), q.task));
        if (q.task == TaskKind::fi || q.task == TaskKind::ci)
            REQUIRE(score(extract_answer(negating.complete(q, ""), q.task), q) ==
                    Verdict::incorrect);
        else
            REQUIRE_THROWS_AS(negating.complete(q, ""), ConfigError);
    }
}

TEST_CASE("endpoint client returns mock completions verbatim") {
    ScriptedTransport transport({ok_completion("hello there")});
    EndpointClient client(test_endpoint(), transport);
    REQUIRE(client.query_model("ping") == "hello there");
    REQUIRE(transport.calls == 1);
    auto body = json::parse(transport.last_request.body);
    REQUIRE(body.at("model") == "test-model");
    REQUIRE(body.at("messages").at(0).at("content") == "ping");
}

TEST_CASE("a 429 is retried once and then succeeds") {
    ScriptedTransport transport({HttpResponse{true, 429, "slow down", ""},
                                 ok_completion("recovered")});
    EndpointClient client(test_endpoint(), transport);
    REQUIRE(client.query_model("x") == "recovered");
    REQUIRE(transport.calls == 2);
}

TEST_CASE("retries exhaust into a transport error; auth failures raise immediately") {
    ScriptedTransport flaky({HttpResponse{false, 0, "", "connect refused"}});
    EndpointClient client(test_endpoint(), flaky);
    REQUIRE_THROWS_AS(client.query_model("x"), TransportError);
    REQUIRE(flaky.calls == 3);

    ScriptedTransport denied({HttpResponse{true, 401, "nope", ""}});
    EndpointClient client2(test_endpoint(), denied);
    REQUIRE_THROWS_AS(client2.query_model("x"), CredentialError);
    REQUIRE(denied.calls == 1);

    ModelEndpoint needs_token = test_endpoint();
    needs_token.auth_env = "CBENCH_TEST_TOKEN_UNSET";
    ScriptedTransport idle({ok_completion("unused")});
    EndpointClient client3(needs_token, idle);
    REQUIRE_THROWS_AS(client3.query_model("x"), CredentialError);
    REQUIRE(idle.calls == 0);
}

TEST_CASE("identical prompts hit the cache instead of the network") {
    fs::path dir = fs::temp_directory_path() / "cbench_cache_test";
    fs::remove_all(dir);
    ScriptedTransport transport({ok_completion("cached answer")});
    EndpointClient client(test_endpoint(), transport, dir);
    REQUIRE(client.query_model("same prompt") == "cached answer");
    REQUIRE(client.query_model("same prompt") == "cached answer");
    REQUIRE(transport.calls == 1);
    REQUIRE(client.cache_hits() == 1);

    // a fresh client over the same directory stays warm
    ScriptedTransport cold({HttpResponse{false, 0, "", "should not be called"}});
    EndpointClient reopened(test_endpoint(), cold, dir);
    REQUIRE(reopened.query_model("same prompt") == "cached answer");
    REQUIRE(cold.calls == 0);
}

TEST_CASE("run_eval produces one row per (question, style) in stable order") {
    auto records = tiny_bench();
    OracleMockClient oracle;
    std::vector<PromptStyle> styles{PromptStyle{}, PromptStyle{PromptStyle::Kind::cot, 0}};
    auto results = run_eval(records, styles, oracle);
    REQUIRE(results.size() == records.size() * styles.size());
    for (size_t i = 0; i < results.size(); ++i) {
        REQUIRE(results[i].question_id == records[i / 2].id);
        REQUIRE(results[i].verdict == Verdict::correct);
    }
    auto threaded = run_eval(records, styles, oracle, EvalOptions{.threads = 4});
    for (size_t i = 0; i < results.size(); ++i)
        REQUIRE(threaded[i].question_id == results[i].question_id);
}

TEST_CASE("results round-trip through JSONL") {
    auto records = tiny_bench();
    OracleMockClient oracle;
    auto results = run_eval(records, {PromptStyle{}}, oracle);
    fs::path path = fs::temp_directory_path() / "cbench_results_test.jsonl";
    write_results(path, results);
    auto back = read_results(path);
    REQUIRE(back.size() == results.size());
    for (size_t i = 0; i < back.size(); ++i) {
        REQUIRE(back[i].question_id == results[i].question_id);
        REQUIRE(back[i].verdict == results[i].verdict);
        REQUIRE(back[i].ce_d == results[i].ce_d);
        REQUIRE(back[i].wi_n == results[i].wi_n);
    }
}

TEST_CASE("aggregation matches an independent tally and flags unknown dims") {
    auto records = tiny_bench();
    OracleMockClient oracle;
    GarbageMockClient garbage;
    auto results = run_eval(records, {PromptStyle{}}, oracle);
    auto junk = run_eval(records, {PromptStyle{PromptStyle::Kind::cot, 0}}, garbage);
    results.insert(results.end(), junk.begin(), junk.end());

    auto report = aggregate(results, {"task", "prompt"});

    // independent tally: plain loop over the results
    std::map<std::pair<std::string, std::string>, std::pair<long, long>> tally;
    for (const EvalResult& r : results) {
        auto& [n, ok] = tally[{r.task, r.prompt_style}];
        ++n;
        if (r.verdict == Verdict::correct) ++ok;
    }
    REQUIRE(report.cells.size() == tally.size());
    for (const AccuracyCell& cell : report.cells) {
        auto [n, ok] = tally.at({cell.key[0], cell.key[1]});
        REQUIRE(cell.total == n);
        REQUIRE(cell.correct == ok);
    }

    // oracle rows are perfect, garbage rows all unparsed
    for (const AccuracyCell& cell : report.cells) {
        if (cell.key[1] == "0-shot") {
            REQUIRE(cell.accuracy() == 100.0);
            REQUIRE(cell.unparsed == 0);
        } else {
            REQUIRE(cell.accuracy() == 0.0);
            REQUIRE(cell.unparsed == cell.total);
        }
    }

    // equal-count cells: micro equals macro
    REQUIRE(report.micro == Catch::Approx(report.macro));

    REQUIRE_THROWS_AS(aggregate(results, {"flavor"}), ValidationError);

    std::string text = report_text(report);
    REQUIRE(text.find("micro average") != std::string::npos);
    REQUIRE(text.find("macro average") != std::string::npos);
    std::string csv = report_csv(report);
    REQUIRE(csv.find("task,prompt,n,correct,unparsed,accuracy") == 0);
}
