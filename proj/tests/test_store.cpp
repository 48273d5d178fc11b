#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cbench/store.hpp"

using namespace cbench;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& tag) {
    fs::path dir = fs::temp_directory_path() / ("cbench_store_" + tag);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

// Small config covering all tasks: 5-tier shapes, few graphs.
BenchmarkConfig small_config(uint64_t seed) {
    BenchmarkConfig config = BenchmarkConfig::paper_default();
    config.master_seed = seed;
    config.seed_set = true;
    for (auto& [task, tc] : config.tasks) {
        tc.shapes = {GraphShape::parse("1x5"), GraphShape::parse("2x5")};
        tc.iterations = {3, 4};
        tc.graphs_per_condition = 3;
        tc.ce_d_per_shape.clear();
    }
    return config;
}

std::string file_bytes(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("records round-trip through JSONL") {
    auto dir = temp_dir("roundtrip");
    auto g = generate_graph(GraphShape{{2, 2, 2, 2, 2}}, 4, {0.1, 0.1, 0.1}, 303);
    auto names = assign_names(g, NameStyle::parse("plain:physics"), TermLexicon::builtin(), 303);
    auto cp = build_cp_question(g, names, NameStyle::parse("plain:physics"), 1.0);
    cp.id = "cp-test-1";
    auto scm = generate_functions(g, g.gen_params().seed);
    auto names_fi =
        assign_names(g, NameStyle::parse("change:biology"), TermLexicon::builtin(), 303);
    auto ci = build_ci_question(scm, names_fi, NameStyle::parse("change:biology"), 2,
                                g.gen_params().seed);
    ci.id = "ci-test-1";

    write_records(dir / "mix.jsonl", {cp, ci});
    auto back = read_records(dir / "mix.jsonl");
    REQUIRE(back.size() == 2);
    REQUIRE(back[0].id == cp.id);
    REQUIRE(back[0].graph.edges() == cp.graph.edges());
    REQUIRE(back[0].names == cp.names);
    REQUIRE(back[0].question_text == cp.question_text);
    REQUIRE(back[0].ground_truth == cp.ground_truth);
    REQUIRE(back[0].stats == cp.stats);
    REQUIRE(back[1].ground_truth == ci.ground_truth);
    REQUIRE(back[1].observed == ci.observed);
    REQUIRE(back[1].interventions == ci.interventions);
    REQUIRE(back[1].wi_n == ci.wi_n);
    REQUIRE(back[1].scm.has_value());

    // serialization is stable byte-for-byte
    write_records(dir / "again.jsonl", back);
    REQUIRE(file_bytes(dir / "mix.jsonl") == file_bytes(dir / "again.jsonl"));
}

TEST_CASE("truncated or malformed lines are reported with their line number") {
    auto dir = temp_dir("badline");
    auto g = generate_graph(GraphShape{{1, 1, 1, 1, 1}}, 3, {0.1, 0.1, 0.1}, 11);
    auto names = assign_names(g, NameStyle{}, TermLexicon::builtin(), 11);
    auto q = build_cp_question(g, names, NameStyle{}, 1.0);
    q.id = "q";
    write_records(dir / "ok.jsonl", {q});

    std::string bytes = file_bytes(dir / "ok.jsonl");
    std::ofstream(dir / "cut.jsonl", std::ios::binary)
        << bytes << bytes.substr(0, bytes.size() / 2);
    try {
        read_records(dir / "cut.jsonl");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        REQUIRE(std::string(e.what()).find("line 2") != std::string::npos);
    }

    std::ofstream(dir / "verjump.jsonl", std::ios::binary)
        << R"({"schema_version": 99})" << "\n";
    REQUIRE_THROWS_AS(read_records(dir / "verjump.jsonl"), ParseError);
}

TEST_CASE("assembly is deterministic and readable back") {
    auto config = small_config(2024);
    auto dir_a = temp_dir("gen_a");
    auto dir_b = temp_dir("gen_b");
    auto manifest_a = assemble(config, dir_a);
    auto manifest_b = assemble(config, dir_b);

    for (const char* file : {"cp.jsonl", "ba.jsonl", "fi.jsonl", "ci.jsonl", "manifest.json"})
        REQUIRE(file_bytes(dir_a / file) == file_bytes(dir_b / file));

    BenchmarkManifest manifest;
    auto bench = read_bench(dir_a, &manifest);
    REQUIRE(manifest.config_hash == manifest_a.config_hash);
    REQUIRE(bench.at(TaskKind::cp).size() ==
            static_cast<size_t>(manifest.files.at("cp.jsonl")));
    // 2 shapes x 2 iteration values x 3 graphs, one ce_d, one wi_n... ci has 3 wi_n
    REQUIRE(bench.at(TaskKind::fi).size() == 12);
    REQUIRE(bench.at(TaskKind::ci).size() == 36);

    // different seed, different bytes
    auto config2 = small_config(2025);
    auto dir_c = temp_dir("gen_c");
    assemble(config2, dir_c);
    REQUIRE(file_bytes(dir_a / "fi.jsonl") != file_bytes(dir_c / "fi.jsonl"));
}

TEST_CASE("every assembled record verifies against recomputation") {
    auto config = small_config(99);
    auto dir = temp_dir("verify");
    assemble(config, dir);
    auto bench = read_bench(dir);
    for (auto& [task, records] : bench)
        for (const QuestionRecord& q : records) REQUIRE_NOTHROW(verify_record(q));
}

TEST_CASE("verification catches drifted ground truth") {
    auto config = small_config(7);
    auto dir = temp_dir("drift");
    assemble(config, dir);
    auto bench = read_bench(dir);
    QuestionRecord q = bench.at(TaskKind::fi).front();
    for (auto& [v, state] : q.ground_truth.states) {
        state = !state;
        break;
    }
    REQUIRE_THROWS_AS(verify_record(q), ValidationError);
}

TEST_CASE("manifest stats match a direct recomputation from the records") {
    auto config = small_config(55);
    auto dir = temp_dir("stats");
    auto manifest = assemble(config, dir);
    auto bench = read_bench(dir);
    for (const ManifestRow& row : manifest.rows) {
        if (row.task != "fi") continue;
        double ind = 0;
        long n = 0;
        for (const QuestionRecord& q : bench.at(TaskKind::fi)) {
            if (q.graph.shape().display() != row.shape) continue;
            ind += q.stats.avg_indegree;
            ++n;
        }
        REQUIRE(n == row.count);
        REQUIRE(ind / static_cast<double>(n) == Catch::Approx(row.avg_indegree));
    }
}

TEST_CASE("stats report renders rows for every bucket") {
    auto config = small_config(31);
    auto dir = temp_dir("report");
    auto manifest = assemble(config, dir);
    std::string text = stats_report_text(manifest);
    REQUIRE(text.find("task") != std::string::npos);
    REQUIRE(text.find("1x5") != std::string::npos);
    REQUIRE(text.find("wi_n=3") != std::string::npos);
    std::string csv = stats_report_csv(manifest);
    REQUIRE(csv.find("task,shape,param") == 0);
    size_t lines = std::count(csv.begin(), csv.end(), '\n');
    REQUIRE(lines == manifest.rows.size() + 1);
}

TEST_CASE("config files parse, serialize and validate") {
    auto config = BenchmarkConfig::paper_default();
    config.master_seed = 42;
    config.seed_set = true;
    std::string text = config.to_text();
    auto back = BenchmarkConfig::parse(text);
    REQUIRE(back.to_text() == text);
    REQUIRE(back.master_seed == 42);
    REQUIRE(back.tasks.at(TaskKind::cp).ce_d_per_shape.at("1x6") ==
            std::vector<double>{1.0, 0.5});

    REQUIRE_THROWS_AS(BenchmarkConfig::parse("[bench]\nbogus = 1\n"), ParseError);
    REQUIRE_THROWS_AS(BenchmarkConfig::parse("stray = 1\n"), ParseError);
    REQUIRE_THROWS_AS(BenchmarkConfig::parse("[bench]\nseed = 1\nseed = 2\n[cp]\n"), ParseError);

    // 4-tier shapes are rejected at assembly scale
    BenchmarkConfig bad = small_config(1);
    bad.tasks.at(TaskKind::cp).shapes = {GraphShape::parse("1x4")};
    REQUIRE_THROWS_AS(bad.validate(), ConfigError);

    // style routing: change names are FI/CI only, plain names CP/BA only
    BenchmarkConfig routing = small_config(1);
    routing.tasks.at(TaskKind::cp).styles = {NameStyle::parse("change:biology")};
    REQUIRE_THROWS_AS(routing.validate(), ConfigError);
    routing = small_config(1);
    routing.tasks.at(TaskKind::fi).styles = {NameStyle::parse("plain:biology")};
    REQUIRE_THROWS_AS(routing.validate(), ConfigError);

    BenchmarkConfig unseeded = small_config(1);
    unseeded.seed_set = false;
    REQUIRE_THROWS_AS(unseeded.validate(), ConfigError);
}

TEST_CASE("cp records share graphs with ba and fi records of the same shape") {
    auto config = small_config(321);
    auto dir = temp_dir("pool");
    assemble(config, dir);
    auto bench = read_bench(dir);
    std::map<std::string, std::vector<Edge>> cp_edges;
    for (const QuestionRecord& q : bench.at(TaskKind::cp)) {
        std::string key = q.graph.shape().display() + "/" +
                          std::to_string(q.graph.gen_params().iterations) + "/" +
                          std::to_string(q.seed);
        cp_edges[key] = q.graph.edges();
    }
    size_t matched = 0;
    for (const QuestionRecord& q : bench.at(TaskKind::fi)) {
        std::string key = q.graph.shape().display() + "/" +
                          std::to_string(q.graph.gen_params().iterations) + "/" +
                          std::to_string(q.seed);
        auto it = cp_edges.find(key);
        if (it != cp_edges.end()) {
            REQUIRE(it->second == q.graph.edges());
            ++matched;
        }
    }
    REQUIRE(matched == bench.at(TaskKind::fi).size());
}
