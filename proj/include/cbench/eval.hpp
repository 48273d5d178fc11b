#pragma once

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "cbench/errors.hpp"
#include "cbench/prompt.hpp"
#include "cbench/question.hpp"
#include "cbench/store.hpp"

namespace cbench {

// ---------------------------------------------------------------------------
// Answer extraction

// Case-insensitive, whitespace-collapsed form used to match phenomenon
// names between completions and records.
inline std::string normalize_name(std::string_view raw) {
    std::string out;
    bool pending_space = false;
    for (char c : raw) {
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    }
    return out;
}

struct ParsedAnswer {
    TaskKind task = TaskKind::cp;
    bool cp_none = false;
    std::vector<std::vector<std::string>> paths;       // CP: normalized names per path
    std::vector<std::vector<std::string>> adjust_sets; // BA: per pair, in listed order
    std::map<std::string, bool> states;                // FI/CI: normalized name -> state
};

namespace detail {

inline std::vector<std::string> split_lines(std::string_view text) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= text.size()) {
        size_t nl = text.find('\n', start);
        size_t end = nl == std::string_view::npos ? text.size() : nl;
        out.emplace_back(text.substr(start, end - start));
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return out;
}

inline std::vector<std::string> split_on(std::string_view text, std::string_view sep) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t at = text.find(sep, start);
        if (at == std::string_view::npos) {
            out.emplace_back(text.substr(start));
            return out;
        }
        out.emplace_back(text.substr(start, at - start));
        start = at + sep.size();
    }
}

} // namespace detail

// Locates the final ANSWER: block and parses it with the per-task grammar.
// Returns nullopt when the block is missing or any payload line violates
// the grammar; such completions score as unparsed.
inline std::optional<ParsedAnswer> extract_answer(const std::string& raw, TaskKind task) {
    auto lines = detail::split_lines(raw);
    size_t block_start = lines.size();
    std::string first_payload;
    for (size_t i = 0; i < lines.size(); ++i) {
        std::string norm = normalize_name(lines[i]);
        if (norm.starts_with("answer:")) {
            block_start = i + 1;
            first_payload = norm.substr(7);
        }
    }
    if (block_start > lines.size()) return std::nullopt;

    std::vector<std::string> payload;
    if (!first_payload.empty() && first_payload != " ")
        payload.push_back(normalize_name(first_payload));
    for (size_t i = block_start; i < lines.size(); ++i) {
        std::string norm = normalize_name(lines[i]);
        if (!norm.empty()) payload.push_back(norm);
    }
    if (payload.empty()) return std::nullopt;

    ParsedAnswer parsed;
    parsed.task = task;
    switch (task) {
        case TaskKind::cp:
            if (payload.size() == 1 && payload[0] == "none") {
                parsed.cp_none = true;
                return parsed;
            }
            for (const std::string& line : payload) {
                if (!line.starts_with("path:")) return std::nullopt;
                std::vector<std::string> nodes;
                for (const std::string& part : detail::split_on(line.substr(5), "->")) {
                    std::string name = normalize_name(part);
                    if (name.empty()) return std::nullopt;
                    nodes.push_back(name);
                }
                if (nodes.size() < 2) return std::nullopt;
                parsed.paths.push_back(std::move(nodes));
            }
            return parsed;
        case TaskKind::ba:
            for (const std::string& line : payload) {
                if (!line.starts_with("adjust:")) return std::nullopt;
                std::string rest = normalize_name(line.substr(7));
                if (rest.size() < 2 || rest.front() != '{' || rest.back() != '}')
                    return std::nullopt;
                std::string inner = rest.substr(1, rest.size() - 2);
                std::vector<std::string> members;
                if (!normalize_name(inner).empty())
                    for (const std::string& part : detail::split_on(inner, ",")) {
                        std::string name = normalize_name(part);
                        if (name.empty()) return std::nullopt;
                        members.push_back(name);
                    }
                parsed.adjust_sets.push_back(std::move(members));
            }
            return parsed;
        case TaskKind::fi:
        case TaskKind::ci:
            for (const std::string& line : payload) {
                auto colon = line.find(':');
                if (colon == std::string::npos) return std::nullopt;
                std::string name = normalize_name(line.substr(0, colon));
                std::string state = normalize_name(line.substr(colon + 1));
                if (name.empty()) return std::nullopt;
                if (state == "happens")
                    parsed.states[name] = true;
                else if (state == "does not happen")
                    parsed.states[name] = false;
                else
                    return std::nullopt;
            }
            return parsed;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// Scoring

enum class Verdict { correct, incorrect, unparsed };

inline std::string verdict_tag(Verdict v) {
    switch (v) {
        case Verdict::correct: return "correct";
        case Verdict::incorrect: return "incorrect";
        case Verdict::unparsed: return "unparsed";
    }
    return {};
}

enum class BaMode { match_minimal, validity_check };

namespace detail {

inline std::map<std::string, int> name_index(const QuestionRecord& q) {
    std::map<std::string, int> out;
    for (auto& [v, name] : q.names) out[normalize_name(name)] = v;
    return out;
}

inline bool score_cp(const ParsedAnswer& a, const QuestionRecord& q) {
    std::map<std::pair<int, int>, std::set<std::vector<int>>> answered;
    if (!a.cp_none) {
        auto index = name_index(q);
        for (const auto& path : a.paths) {
            std::vector<int> nodes;
            for (const std::string& name : path) {
                auto it = index.find(name);
                if (it == index.end()) return false;
                nodes.push_back(it->second);
            }
            answered[{nodes.front(), nodes.back()}].insert(std::move(nodes));
        }
    }
    std::set<std::pair<int, int>> truth_pairs;
    for (const auto& pair : q.ground_truth.cp) {
        truth_pairs.insert({pair.cause, pair.effect});
        std::set<std::vector<int>> expected;
        for (const Path& p : pair.paths) expected.insert(p.nodes);
        auto it = answered.find({pair.cause, pair.effect});
        const std::set<std::vector<int>> empty;
        if ((it == answered.end() ? empty : it->second) != expected) return false;
    }
    for (auto& [pair, _] : answered)
        if (!truth_pairs.count(pair)) return false; // paths outside the asked pairs
    return true;
}

inline bool score_ba(const ParsedAnswer& a, const QuestionRecord& q, BaMode mode) {
    if (a.adjust_sets.size() != q.ground_truth.ba.size()) return false;
    auto index = name_index(q);
    for (size_t i = 0; i < a.adjust_sets.size(); ++i) {
        std::set<int> z;
        for (const std::string& name : a.adjust_sets[i]) {
            auto it = index.find(name);
            if (it == index.end()) return false;
            z.insert(it->second);
        }
        const AdjustmentGroundTruth& truth = q.ground_truth.ba[i];
        if (mode == BaMode::match_minimal) {
            bool found = false;
            for (const auto& m : truth.minimal_sets)
                if (m == z) found = true;
            if (!found) return false;
        } else {
            if (z.count(truth.treatment) || z.count(truth.outcome)) return false;
            if (!is_valid_adjustment_set(q.graph, truth.treatment, truth.outcome, z)) return false;
        }
    }
    return true;
}

inline bool score_states(const ParsedAnswer& a, const QuestionRecord& q) {
    for (auto& [v, state] : q.ground_truth.states) {
        auto it = a.states.find(normalize_name(q.names.at(v)));
        if (it == a.states.end() || it->second != state) return false;
    }
    return true;
}

} // namespace detail

// Pure exact-match scoring. CP compares the per-pair path sets, BA either
// matches a stored minimal set or re-checks validity, FI/CI require every
// queried state to match.
inline Verdict score(const std::optional<ParsedAnswer>& parsed, const QuestionRecord& q,
                     BaMode ba_mode = BaMode::match_minimal) {
    if (!parsed) return Verdict::unparsed;
    bool ok = false;
    switch (q.task) {
        case TaskKind::cp: ok = detail::score_cp(*parsed, q); break;
        case TaskKind::ba: ok = detail::score_ba(*parsed, q, ba_mode); break;
        case TaskKind::fi:
        case TaskKind::ci: ok = detail::score_states(*parsed, q); break;
    }
    return ok ? Verdict::correct : Verdict::incorrect;
}

// ---------------------------------------------------------------------------
// Model clients

class ModelClient {
  public:
    virtual ~ModelClient() = default;
    virtual std::string model_id() const = 0;
    virtual std::string complete(const QuestionRecord& q, const std::string& prompt) = 0;
};

// Answers every question from its stored ground truth.
class OracleMockClient : public ModelClient {
  public:
    std::string model_id() const override { return "oracle-mock"; }
    std::string complete(const QuestionRecord& q, const std::string&) override {
        return render_answer_block(q);
    }
};

// Flips every queried state; FI/CI only, where wrongness is guaranteed.
class NegatingMockClient : public ModelClient {
  public:
    std::string model_id() const override { return "negating-mock"; }
    std::string complete(const QuestionRecord& q, const std::string&) override {
        if (q.task != TaskKind::fi && q.task != TaskKind::ci)
            throw ConfigError("the negating mock only covers FI/CI tasks");
        std::string out = "ANSWER:\n";
        for (auto& [v, state] : q.ground_truth.states)
            out += q.names.at(v) + (!state ? ": happens\n" : ": does not happen\n");
        out.pop_back();
        return out;
    }
};

// Free-form rambling with no ANSWER block: every completion is unparsed.
class GarbageMockClient : public ModelClient {
  public:
    std::string model_id() const override { return "garbage-mock"; }
    std::string complete(const QuestionRecord& q, const std::string&) override {
        return "Interesting question about " + q.names.begin()->second +
               "; it could go either way, hard to say without more context.";
    }
};

// ---------------------------------------------------------------------------
// HTTP endpoint client with cache, retry and rate limiting

struct ModelEndpoint {
    std::string base_url;                        // e.g. https://api.example.com
    std::string path = "/v1/chat/completions";
    std::string model;
    std::string auth_env = "MODEL_API_KEY";      // name of the env var holding the token
    double temperature = 0.0;
    int max_tokens = 2048;
    double requests_per_minute = 60.0;
    int max_attempts = 3;
    int backoff_ms = 1000;
    std::string content_pointer = "/choices/0/message/content";
    std::map<std::string, std::string> extra_headers;

    void validate() const {
        if (base_url.empty()) throw ConfigError("endpoint needs a base_url");
        if (model.empty()) throw ConfigError("endpoint needs a model id");
        if (requests_per_minute <= 0) throw ConfigError("rate limit must be positive");
        if (max_attempts < 1) throw ConfigError("max_attempts must be >= 1");
    }

    // INI format, [endpoint] section.
    static ModelEndpoint parse(std::string_view text) {
        ModelEndpoint e;
        auto ini = detail::parse_ini(text);
        auto section = ini.find("endpoint");
        if (section == ini.end()) throw ParseError("endpoint config needs an [endpoint] section");
        for (auto& [key, value] : section->second) {
            if (key == "base_url") e.base_url = value;
            else if (key == "path") e.path = value;
            else if (key == "model") e.model = value;
            else if (key == "auth_env") e.auth_env = value;
            else if (key == "temperature") e.temperature = std::stod(value);
            else if (key == "max_tokens") e.max_tokens = std::stoi(value);
            else if (key == "requests_per_minute") e.requests_per_minute = std::stod(value);
            else if (key == "max_attempts") e.max_attempts = std::stoi(value);
            else if (key == "backoff_ms") e.backoff_ms = std::stoi(value);
            else if (key == "content_pointer") e.content_pointer = value;
            else if (key.starts_with("header:")) e.extra_headers[key.substr(7)] = value;
            else throw ParseError("unknown [endpoint] key '" + key + "'");
        }
        e.validate();
        return e;
    }
};

struct HttpRequest {
    std::string url;
    std::string body;
    std::vector<std::pair<std::string, std::string>> headers;
};

struct HttpResponse {
    bool transport_ok = false;
    int status = 0;
    std::string body;
    std::string error;
};

class Transport {
  public:
    virtual ~Transport() = default;
    virtual HttpResponse post(const HttpRequest& request) = 0;
};

// One file per request hash holding both request and response; concurrent
// readers, serialized writers.
class ResponseCache {
  public:
    explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    std::optional<json> lookup(const std::string& key) const {
        std::ifstream in(entry_path(key), std::ios::binary);
        if (!in) return std::nullopt;
        try {
            return json::parse(in);
        } catch (const json::exception&) {
            return std::nullopt;
        }
    }

    void store(const std::string& key, const json& entry) {
        std::lock_guard<std::mutex> lock(write_mutex_);
        auto tmp = entry_path(key);
        tmp += ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            out << entry.dump(2) << "\n";
        }
        std::filesystem::rename(tmp, entry_path(key));
    }

  private:
    std::filesystem::path entry_path(const std::string& key) const {
        return dir_ / (key + ".json");
    }

    std::filesystem::path dir_;
    std::mutex write_mutex_;
};

// Spaces requests so the endpoint sees at most requests_per_minute.
class RateLimiter {
  public:
    explicit RateLimiter(double per_minute)
        : interval_(std::chrono::duration<double>(60.0 / per_minute)) {}

    void wait() {
        std::unique_lock<std::mutex> lock(mutex_);
        auto now = std::chrono::steady_clock::now();
        if (next_ > now) {
            auto until = next_;
            next_ += std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
            lock.unlock();
            std::this_thread::sleep_until(until);
            return;
        }
        next_ = now + std::chrono::duration_cast<std::chrono::steady_clock::duration>(interval_);
    }

  private:
    std::chrono::duration<double> interval_;
    std::chrono::steady_clock::time_point next_ = std::chrono::steady_clock::now();
    std::mutex mutex_;
};

// Chat-completion client. Responses are cached on disk keyed by
// hash(model, request params, prompt bytes); a cache hit never touches the
// network. Transient failures (transport errors, 429, 5xx) retry with
// exponential backoff; auth failures raise immediately and never log the
// token.
class EndpointClient : public ModelClient {
  public:
    EndpointClient(ModelEndpoint endpoint, Transport& transport,
                   std::optional<std::filesystem::path> cache_dir = std::nullopt)
        : endpoint_(std::move(endpoint)),
          transport_(transport),
          limiter_(endpoint_.requests_per_minute) {
        endpoint_.validate();
        if (cache_dir) cache_.emplace(*cache_dir);
    }

    std::string model_id() const override { return endpoint_.model; }

    std::string complete(const QuestionRecord&, const std::string& prompt) override {
        return query_model(prompt);
    }

    std::string query_model(const std::string& prompt) {
        json request_body;
        request_body["model"] = endpoint_.model;
        request_body["temperature"] = endpoint_.temperature;
        request_body["max_tokens"] = endpoint_.max_tokens;
        request_body["messages"] = json::array({json{{"role", "user"}, {"content", prompt}}});
        std::string body = request_body.dump();

        std::string key = detail::content_hash(endpoint_.model + "|" + endpoint_.base_url + "|" +
                                               body);
        if (cache_) {
            if (auto entry = cache_->lookup(key)) {
                ++cache_hits_;
                return entry->at("content").get<std::string>();
            }
        }

        HttpRequest request;
        request.url = endpoint_.base_url + endpoint_.path;
        request.body = body;
        request.headers.emplace_back("Content-Type", "application/json");
        if (!endpoint_.auth_env.empty()) {
            const char* token = std::getenv(endpoint_.auth_env.c_str());
            if (!token || !*token)
                throw CredentialError("environment variable " + endpoint_.auth_env +
                                      " is not set");
            request.headers.emplace_back("Authorization", std::string("Bearer ") + token);
        }
        for (auto& [k, v] : endpoint_.extra_headers) request.headers.emplace_back(k, v);

        HttpResponse response;
        std::string last_error;
        for (int attempt = 1; attempt <= endpoint_.max_attempts; ++attempt) {
            limiter_.wait();
            ++network_calls_;
            response = transport_.post(request);
            if (response.transport_ok && response.status == 200) break;
            if (response.transport_ok && (response.status == 401 || response.status == 403))
                throw CredentialError("endpoint rejected the credentials (HTTP " +
                                      std::to_string(response.status) + ")");
            bool transient = !response.transport_ok || response.status == 429 ||
                             response.status >= 500;
            last_error = response.transport_ok
                             ? "HTTP " + std::to_string(response.status)
                             : "transport error: " + response.error;
            if (!transient)
                throw TransportError("request failed permanently: " + last_error);
            if (attempt == endpoint_.max_attempts)
                throw TransportError("retries exhausted after " +
                                     std::to_string(endpoint_.max_attempts) +
                                     " attempts: " + last_error);
            std::this_thread::sleep_for(std::chrono::milliseconds(
                static_cast<long>(endpoint_.backoff_ms) << (attempt - 1)));
        }

        json parsed;
        try {
            parsed = json::parse(response.body);
        } catch (const json::exception& e) {
            throw TransportError(std::string("endpoint returned malformed JSON: ") + e.what());
        }
        std::string content;
        try {
            content = parsed.at(json::json_pointer(endpoint_.content_pointer)).get<std::string>();
        } catch (const json::exception&) {
            throw TransportError("response lacks content at pointer " +
                                 endpoint_.content_pointer);
        }

        if (cache_) {
            json entry;
            entry["request"] = request_body;
            entry["response_body"] = response.body;
            entry["content"] = content;
            cache_->store(key, entry);
        }
        return content;
    }

    long network_calls() const { return network_calls_; }
    long cache_hits() const { return cache_hits_; }

  private:
    ModelEndpoint endpoint_;
    Transport& transport_;
    RateLimiter limiter_;
    std::optional<ResponseCache> cache_;
    std::atomic<long> network_calls_{0};
    std::atomic<long> cache_hits_{0};
};

// ---------------------------------------------------------------------------
// Evaluation loop and aggregation

struct EvalResult {
    std::string question_id;
    std::string model;
    std::string prompt_style;
    std::string task;
    std::string shape;
    int iterations = 0;
    std::optional<double> ce_d;
    std::optional<int> wi_n;
    std::string name_style;
    Verdict verdict = Verdict::unparsed;
    std::string raw;
};

inline json eval_result_to_json(const EvalResult& r) {
    json j;
    j["question_id"] = r.question_id;
    j["model"] = r.model;
    j["prompt"] = r.prompt_style;
    j["task"] = r.task;
    j["shape"] = r.shape;
    j["iterations"] = r.iterations;
    if (r.ce_d) j["ce_d"] = *r.ce_d;
    if (r.wi_n) j["wi_n"] = *r.wi_n;
    j["name_style"] = r.name_style;
    j["verdict"] = verdict_tag(r.verdict);
    j["raw"] = r.raw;
    return j;
}

inline EvalResult eval_result_from_json(const json& j) {
    EvalResult r;
    r.question_id = j.at("question_id").get<std::string>();
    r.model = j.at("model").get<std::string>();
    r.prompt_style = j.at("prompt").get<std::string>();
    r.task = j.at("task").get<std::string>();
    r.shape = j.at("shape").get<std::string>();
    r.iterations = j.at("iterations").get<int>();
    if (j.contains("ce_d")) r.ce_d = j.at("ce_d").get<double>();
    if (j.contains("wi_n")) r.wi_n = j.at("wi_n").get<int>();
    r.name_style = j.at("name_style").get<std::string>();
    std::string v = j.at("verdict").get<std::string>();
    r.verdict = v == "correct" ? Verdict::correct
                               : v == "incorrect" ? Verdict::incorrect : Verdict::unparsed;
    r.raw = j.at("raw").get<std::string>();
    return r;
}

inline void write_results(const std::filesystem::path& path,
                          const std::vector<EvalResult>& results) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot open '" + path.string() + "' for writing");
    for (const EvalResult& r : results) out << eval_result_to_json(r).dump() << "\n";
}

inline std::vector<EvalResult> read_results(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    std::vector<EvalResult> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(eval_result_from_json(json::parse(line)));
        } catch (const json::exception& e) {
            throw ParseError(path.filename().string() + " line " + std::to_string(line_no) +
                             ": " + e.what());
        }
    }
    return out;
}

struct EvalOptions {
    BaMode ba_mode = BaMode::match_minimal;
    int threads = 1;
    const ExemplarBank* bank = nullptr;
    std::ostream* log = nullptr;
};

// Runs every (question, style) trial: render, complete, extract, score.
// Order of results is deterministic regardless of thread count.
inline std::vector<EvalResult> run_eval(const std::vector<QuestionRecord>& records,
                                        const std::vector<PromptStyle>& styles,
                                        ModelClient& client, const EvalOptions& opts = {}) {
    const ExemplarBank& bank = opts.bank ? *opts.bank : ExemplarBank::builtin();
    struct Trial {
        const QuestionRecord* record;
        const PromptStyle* style;
    };
    std::vector<Trial> trials;
    for (const QuestionRecord& q : records)
        for (const PromptStyle& s : styles) trials.push_back({&q, &s});

    std::vector<EvalResult> results(trials.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        while (true) {
            size_t i = next.fetch_add(1);
            if (i >= trials.size()) return;
            const QuestionRecord& q = *trials[i].record;
            const PromptStyle& style = *trials[i].style;
            std::string prompt = render_prompt(q, style, bank);
            std::string raw = client.complete(q, prompt);
            EvalResult r;
            r.question_id = q.id;
            r.model = client.model_id();
            r.prompt_style = style.tag();
            r.task = task_tag(q.task);
            r.shape = q.graph.shape().display();
            r.iterations = q.graph.gen_params().iterations;
            r.ce_d = q.ce_d;
            r.wi_n = q.wi_n;
            r.name_style = q.name_style.tag();
            r.verdict = score(extract_answer(raw, q.task), q, opts.ba_mode);
            r.raw = raw;
            results[i] = std::move(r);
        }
    };
    int threads = std::max(1, opts.threads);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (opts.log) *opts.log << "evaluated " << results.size() << " trials\n";
    return results;
}

struct AccuracyCell {
    std::vector<std::string> key;
    long total = 0;
    long correct = 0;
    long unparsed = 0;

    double accuracy() const {
        return total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    }
};

struct AccuracyReport {
    std::vector<std::string> dims;
    std::vector<AccuracyCell> cells;
    double micro = 0.0; // pooled accuracy over all trials
    double macro = 0.0; // unweighted mean of cell accuracies
};

inline const std::vector<std::string>& known_dims() {
    static const std::vector<std::string> dims = {"task",  "shape", "prompt",     "iterations",
                                                  "ce_d",  "wi_n",  "name_style", "model"};
    return dims;
}

inline std::string dim_value(const EvalResult& r, const std::string& dim) {
    if (dim == "task") return r.task;
    if (dim == "shape") return r.shape;
    if (dim == "prompt") return r.prompt_style;
    if (dim == "iterations") return std::to_string(r.iterations);
    if (dim == "ce_d") return r.ce_d ? detail::format_double(*r.ce_d) : "-";
    if (dim == "wi_n") return r.wi_n ? std::to_string(*r.wi_n) : "-";
    if (dim == "name_style") return r.name_style;
    if (dim == "model") return r.model;
    throw ValidationError("unknown aggregation dimension '" + dim + "'");
}

// Accuracy per cell of the requested grouping dimensions, plus pooled
// (micro) and unweighted (macro) averages; the two coincide when every cell
// holds the same number of trials.
inline AccuracyReport aggregate(const std::vector<EvalResult>& results,
                                const std::vector<std::string>& dims) {
    for (const std::string& dim : dims) {
        bool known = false;
        for (const std::string& k : known_dims())
            if (k == dim) known = true;
        if (!known) throw ValidationError("unknown aggregation dimension '" + dim + "'");
    }
    AccuracyReport report;
    report.dims = dims;
    std::map<std::vector<std::string>, AccuracyCell> cells;
    long total = 0, correct = 0;
    for (const EvalResult& r : results) {
        std::vector<std::string> key;
        for (const std::string& dim : dims) key.push_back(dim_value(r, dim));
        AccuracyCell& cell = cells[key];
        cell.key = key;
        ++cell.total;
        ++total;
        if (r.verdict == Verdict::correct) {
            ++cell.correct;
            ++correct;
        }
        if (r.verdict == Verdict::unparsed) ++cell.unparsed;
    }
    double macro_sum = 0.0;
    for (auto& [key, cell] : cells) {
        macro_sum += cell.accuracy();
        report.cells.push_back(cell);
    }
    report.micro = total == 0 ? 0.0 : 100.0 * static_cast<double>(correct) / static_cast<double>(total);
    report.macro = report.cells.empty() ? 0.0 : macro_sum / static_cast<double>(report.cells.size());
    return report;
}

inline std::string report_text(const AccuracyReport& report) {
    std::string out;
    char buf[64];
    for (const std::string& dim : report.dims) {
        std::snprintf(buf, sizeof buf, "%-14s ", dim.c_str());
        out += buf;
    }
    out += "    n  correct unparsed accuracy\n";
    for (const AccuracyCell& cell : report.cells) {
        for (const std::string& v : cell.key) {
            std::snprintf(buf, sizeof buf, "%-14s ", v.c_str());
            out += buf;
        }
        std::snprintf(buf, sizeof buf, "%5ld %8ld %8ld %8.2f\n", cell.total, cell.correct,
                      cell.unparsed, cell.accuracy());
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "micro average: %.2f\n", report.micro);
    out += buf;
    std::snprintf(buf, sizeof buf, "macro average: %.2f\n", report.macro);
    out += buf;
    return out;
}

inline std::string report_csv(const AccuracyReport& report) {
    std::string out;
    for (const std::string& dim : report.dims) out += dim + ",";
    out += "n,correct,unparsed,accuracy\n";
    char buf[64];
    for (const AccuracyCell& cell : report.cells) {
        for (const std::string& v : cell.key) out += v + ",";
        std::snprintf(buf, sizeof buf, "%ld,%ld,%ld,%.2f\n", cell.total, cell.correct,
                      cell.unparsed, cell.accuracy());
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "micro,%.2f\nmacro,%.2f\n", report.micro, report.macro);
    out += buf;
    return out;
}

} // namespace cbench
