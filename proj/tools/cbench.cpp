// Command-line front end: generate benchmarks, inspect them, render
// prompts, run model evaluations and aggregate the results.

#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>

#include "cbench/eval.hpp"
#include "cbench/http_transport.hpp"
#include "cbench/prompt.hpp"
#include "cbench/store.hpp"

using namespace cbench;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> split_csv(const std::string& value) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= value.size()) {
        size_t comma = value.find(',', start);
        size_t end = comma == std::string::npos ? value.size() : comma;
        std::string item = value.substr(start, end - start);
        if (!item.empty()) out.push_back(item);
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

const QuestionRecord& find_record(const std::map<TaskKind, std::vector<QuestionRecord>>& bench,
                                  const std::string& id) {
    for (auto& [task, records] : bench)
        for (const QuestionRecord& q : records)
            if (q.id == id) return q;
    throw ConfigError("no record with id '" + id + "'");
}

struct GenArgs {
    std::string config_path;
    std::string out_dir;
    uint64_t seed = 0;
    bool seed_given = false;
    std::string lexicon_path;
    std::string templates_path;
    bool print_config = false;
};

int run_gen(const GenArgs& args) {
    BenchmarkConfig config = args.config_path.empty()
                                 ? BenchmarkConfig::paper_default()
                                 : BenchmarkConfig::parse(slurp(args.config_path));
    if (args.seed_given) {
        config.master_seed = args.seed;
        config.seed_set = true;
    }
    if (args.print_config) {
        std::cout << config.to_text();
        return 0;
    }
    if (args.out_dir.empty()) throw ConfigError("gen needs --out");

    TermLexicon lexicon =
        args.lexicon_path.empty() ? TermLexicon::builtin() : TermLexicon::parse(slurp(args.lexicon_path));
    QuestionTemplates templates = args.templates_path.empty()
                                      ? QuestionTemplates::builtin()
                                      : QuestionTemplates::parse(slurp(args.templates_path));
    AssembleOptions opts;
    opts.lexicon = &lexicon;
    opts.templates = &templates;
    opts.log = &std::cerr;
    BenchmarkManifest manifest = assemble(config, args.out_dir, opts);
    long total = 0;
    for (auto& [file, count] : manifest.files) total += count;
    std::cout << "wrote " << total << " questions to " << args.out_dir << " (config hash "
              << manifest.config_hash << ")\n";
    return 0;
}

int run_stats(const std::string& bench_dir, const std::string& csv_path) {
    BenchmarkManifest manifest = read_manifest(bench_dir);
    std::cout << stats_report_text(manifest);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw ConfigError("cannot open '" + csv_path + "' for writing");
        out << stats_report_csv(manifest);
        std::cout << "wrote " << csv_path << "\n";
    }
    return 0;
}

int run_solve(const std::string& bench_dir, const std::string& id, bool verify_all) {
    auto bench = read_bench(bench_dir);
    if (verify_all) {
        long checked = 0;
        for (auto& [task, records] : bench)
            for (const QuestionRecord& q : records) {
                verify_record(q);
                ++checked;
            }
        std::cout << "verified " << checked << " records: stored ground truth matches "
                  << "recomputation\n";
        return 0;
    }
    const QuestionRecord& q = find_record(bench, id);
    verify_record(q);
    std::cout << record_to_json(q).at("ground_truth").dump(2) << "\n\n"
              << render_answer_block(q) << "\n";
    return 0;
}

int run_prompt(const std::string& bench_dir, const std::string& id, const std::string& style) {
    auto bench = read_bench(bench_dir);
    const QuestionRecord& q = find_record(bench, id);
    std::cout << render_prompt(q, PromptStyle::parse(style)) << "\n";
    return 0;
}

struct EvalArgs {
    std::string bench_dir;
    std::string out_path;
    std::string mock;
    std::string endpoint_path;
    std::string styles = "0-shot,1-shot,2-shot,0-cot,1-cot,2-cot,mis-hint";
    std::string tasks;
    std::string cache_dir;
    std::string ba_mode = "minimal";
    long limit = 0;
    int threads = 1;
};

int run_eval_cmd(const EvalArgs& args) {
    if (args.mock.empty() == args.endpoint_path.empty())
        throw ConfigError("eval needs exactly one of --mock or --endpoint");

    auto bench = read_bench(args.bench_dir);
    std::vector<QuestionRecord> records;
    std::set<std::string> task_filter;
    for (const std::string& t : split_csv(args.tasks)) task_filter.insert(t);
    for (auto& [task, task_records] : bench) {
        if (!task_filter.empty() && !task_filter.count(task_tag(task))) continue;
        long taken = 0;
        for (const QuestionRecord& q : task_records) {
            if (args.limit > 0 && taken >= args.limit) break;
            records.push_back(q);
            ++taken;
        }
    }
    if (records.empty()) throw ConfigError("no questions selected");

    std::vector<PromptStyle> styles;
    for (const std::string& s : split_csv(args.styles)) styles.push_back(PromptStyle::parse(s));
    if (styles.empty()) throw ConfigError("no prompt styles selected");

    std::unique_ptr<ModelClient> client;
    std::unique_ptr<Transport> transport;
    if (!args.mock.empty()) {
        if (args.mock == "oracle") client = std::make_unique<OracleMockClient>();
        else if (args.mock == "negate") client = std::make_unique<NegatingMockClient>();
        else if (args.mock == "garbage") client = std::make_unique<GarbageMockClient>();
        else throw ConfigError("unknown mock '" + args.mock + "' (oracle, negate, garbage)");
    } else {
        ModelEndpoint endpoint = ModelEndpoint::parse(slurp(args.endpoint_path));
        transport = std::make_unique<HttplibTransport>();
        std::optional<std::filesystem::path> cache;
        if (!args.cache_dir.empty()) cache = args.cache_dir;
        client = std::make_unique<EndpointClient>(endpoint, *transport, cache);
    }

    EvalOptions opts;
    opts.threads = args.threads;
    if (args.ba_mode == "minimal") opts.ba_mode = BaMode::match_minimal;
    else if (args.ba_mode == "validity") opts.ba_mode = BaMode::validity_check;
    else throw ConfigError("unknown --ba-mode '" + args.ba_mode + "' (minimal, validity)");

    auto results = run_eval(records, styles, *client, opts);
    write_results(args.out_path, results);
    long correct = 0, unparsed = 0;
    for (const EvalResult& r : results) {
        if (r.verdict == Verdict::correct) ++correct;
        if (r.verdict == Verdict::unparsed) ++unparsed;
    }
    std::cout << "wrote " << results.size() << " results to " << args.out_path << " ("
              << correct << " correct, " << unparsed << " unparsed)\n";
    return 0;
}

int run_report(const std::string& results_path, const std::string& dims_csv,
               const std::string& csv_path) {
    auto results = read_results(results_path);
    auto report = aggregate(results, split_csv(dims_csv));
    std::cout << report_text(report);
    if (!csv_path.empty()) {
        std::ofstream out(csv_path, std::ios::binary);
        if (!out) throw ConfigError("cannot open '" + csv_path + "' for writing");
        out << report_csv(report);
        std::cout << "wrote " << csv_path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"causal-inference benchmark generator and evaluation harness"};
    app.require_subcommand(1);

    GenArgs gen_args;
    CLI::App* gen = app.add_subcommand("gen", "assemble a benchmark from a config");
    gen->add_option("--config", gen_args.config_path, "benchmark config file (key = value)");
    gen->add_option("--seed", gen_args.seed, "master seed")->each([&](const std::string&) {
        gen_args.seed_given = true;
    });
    gen->add_option("--out", gen_args.out_dir, "output directory");
    gen->add_option("--lexicon", gen_args.lexicon_path, "term lexicon file");
    gen->add_option("--templates", gen_args.templates_path, "question template file");
    gen->add_flag("--print-config", gen_args.print_config, "print the effective config and exit");

    std::string stats_bench, stats_csv;
    CLI::App* stats = app.add_subcommand("stats", "print per-shape complexity tables");
    stats->add_option("--bench", stats_bench, "benchmark directory")->required();
    stats->add_option("--csv", stats_csv, "also write the table as CSV");

    std::string solve_bench, solve_id;
    bool solve_verify_all = false;
    CLI::App* solve = app.add_subcommand("solve", "print or verify oracle ground truth");
    solve->add_option("--bench", solve_bench, "benchmark directory")->required();
    solve->add_option("--id", solve_id, "question id");
    solve->add_flag("--verify-all", solve_verify_all, "recompute and check every record");

    std::string prompt_bench, prompt_id, prompt_style = "0-shot";
    CLI::App* prompt = app.add_subcommand("prompt", "render a prompt for a question");
    prompt->add_option("--bench", prompt_bench, "benchmark directory")->required();
    prompt->add_option("--id", prompt_id, "question id")->required();
    prompt->add_option("--style", prompt_style,
                       "0-shot, 1-shot, 2-shot, 0-cot, 1-cot, 2-cot or mis-hint");

    EvalArgs eval_args;
    CLI::App* eval = app.add_subcommand("eval", "run a model over a benchmark slice");
    eval->add_option("--bench", eval_args.bench_dir, "benchmark directory")->required();
    eval->add_option("--out", eval_args.out_path, "results JSONL path")->required();
    eval->add_option("--mock", eval_args.mock, "oracle, negate or garbage");
    eval->add_option("--endpoint", eval_args.endpoint_path, "endpoint config file");
    eval->add_option("--styles", eval_args.styles, "comma list of prompt styles");
    eval->add_option("--tasks", eval_args.tasks, "comma list of tasks (default all)");
    eval->add_option("--limit", eval_args.limit, "max questions per task");
    eval->add_option("--cache", eval_args.cache_dir, "response cache directory");
    eval->add_option("--ba-mode", eval_args.ba_mode, "minimal or validity");
    eval->add_option("--threads", eval_args.threads, "parallel requests");

    std::string report_results, report_dims = "task,shape", report_csv_path;
    CLI::App* report = app.add_subcommand("report", "aggregate results into accuracy tables");
    report->add_option("--results", report_results, "results JSONL path")->required();
    report->add_option("--dims", report_dims, "grouping keys, e.g. shape,prompt");
    report->add_option("--csv", report_csv_path, "also write the table as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        return 2;
    }

    try {
        if (gen->parsed()) {
            if (!gen_args.print_config && !gen_args.seed_given && gen_args.config_path.empty())
                throw ConfigError("gen needs --seed (or a config file with one)");
            return run_gen(gen_args);
        }
        if (stats->parsed()) return run_stats(stats_bench, stats_csv);
        if (solve->parsed()) {
            if (solve_id.empty() && !solve_verify_all)
                throw ConfigError("solve needs --id or --verify-all");
            return run_solve(solve_bench, solve_id, solve_verify_all);
        }
        if (prompt->parsed()) return run_prompt(prompt_bench, prompt_id, prompt_style);
        if (eval->parsed()) return run_eval_cmd(eval_args);
        if (report->parsed()) return run_report(report_results, report_dims, report_csv_path);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
