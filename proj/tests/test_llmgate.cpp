#include <doctest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <atomic>
#include <cstdlib>
#include <thread>

#include "lmda/llmgate.hpp"
#include "lmda/promptgen.hpp"
#include "test_support.hpp"

using namespace lmda;

namespace {

std::vector<Question> two_questions() {
  return {{"q1", "t1", {1, Pole::Positive}, "First question?"},
          {"q2", "t1", {1, Pole::Negative}, "Second question?"}};
}

std::string echo_prompt(const Question& q, PromptMode mode) {
  if (!is_rag(mode)) return "QUESTION: " + q.text + "\n";
  return "QUESTION: " + q.text + "\n\nCONTEXT:\n[1] passage for " + q.id + "\n";
}

// Local stand-in for a chat-completion service.
class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

}  // namespace

TEST_CASE("mock echoes passages and the vocabulary line") {
  const MockEndpoint mock("m");
  const std::string rag = "QUESTION: q\n\nCONTEXT:\n[1] A text\n[2] B text\n[3] C text\n\nOUTPUT:";
  const auto answer = mock.generate(rag);
  CHECK(answer == "A text B text C text");
  CHECK(mock.generate("QUESTION: q\n\nOUTPUT:") == MockEndpoint::kNeutralAnswer);
  CHECK(mock.generate("Typical vocabulary:\nmortality, trial\n\nExample texts:\n[1] A\n\nAnswer:") ==
        "mortality, trial. A");
  CHECK(MockEndpoint("m", 2, 3).generate(rag) == "A text B");
  CHECK_THROWS_AS(MockEndpoint("m", 2, -1), Error);
  CHECK(mock.temperature() == 0.0);
}

TEST_CASE("questions file") {
  const auto qs = load_questions(default_questions_path());
  CHECK(qs.size() == 36);
  std::set<std::string> ids;
  for (const auto& q : qs) {
    CHECK_FALSE(q.text.empty());
    CHECK(q.dp.dim >= 1);
    CHECK(q.dp.dim <= 3);
    ids.insert(q.id);
  }
  CHECK(ids.size() == qs.size());
  CHECK_THROWS_AS(parse_questions(R"({"questions": [{"id": "x"}]})"), Error);
}

TEST_CASE("records round-trip through json lines") {
  AnswerRecord r;
  r.model = "m";
  r.dp = {2, Pole::Negative};
  r.topic_id = "t";
  r.question_id = "q";
  r.mode = PromptMode::EnhancedRag;
  r.repeat_index = 1;
  r.prompt_hash = "ab";
  r.answer_text = "line one\nline \"two\"";
  r.timestamp = "2024-01-01T00:00:00Z";
  r.temperature = 0.7;
  r.max_tokens = 512;
  CHECK(record_from_json_line(record_to_json_line(r)) == r);
  CHECK(record_to_json_line(r).find('\n') == std::string::npos);
  CHECK(r.key() == "m|2-|q|enhanced-rag|1");
}

TEST_CASE("grid runs once per cell and resumes") {
  testing::TempDir dir("grid");
  const MockEndpoint a("a"), b("b");
  const std::vector<const ChatEndpoint*> endpoints{&a, &b};
  const auto qs = two_questions();
  const auto modes = all_prompt_modes();
  {
    RecordStore store(dir / "answers.jsonl");
    const auto s = run_grid(endpoints, {qs[0]}, {PromptMode::RegularRag}, 1, echo_prompt, store,
                            fixed_clock("T"));
    CHECK(s.generated == 2);
    CHECK(store.size() == 2);
  }
  {
    RecordStore store(dir / "answers.jsonl");
    const auto s = run_grid(endpoints, {qs[0]}, {PromptMode::RegularRag}, 1, echo_prompt, store,
                            fixed_clock("T"));
    CHECK(s.generated == 0);
    CHECK(s.skipped == 2);
  }
  RecordStore store(dir / "answers.jsonl");
  const auto s = run_grid(endpoints, qs, modes, 2, echo_prompt, store, fixed_clock("T"));
  CHECK(s.planned == 2 * 2 * 4 * 2);
  CHECK(s.generated == s.planned - 2);
  const auto records = store.records();
  CHECK(records.size() == s.planned);
  CHECK(records[0].model == "a");
  CHECK(records[0].answer_text == "passage for q1");
  CHECK(records[0].timestamp == "T");
  CHECK(records[0].prompt_hash.size() == 64);
  CHECK(load_records(dir / "answers.jsonl").size() == s.planned);
}

TEST_CASE("failed cells are recorded and retried") {
  testing::TempDir dir("grid-fail");
  const MockEndpoint a("a");
  const std::vector<const ChatEndpoint*> endpoints{&a};
  bool fail = true;
  const PromptBuilder flaky = [&](const Question& q, PromptMode m) -> std::string {
    if (fail) throw Error("no context for " + q.id);
    return echo_prompt(q, m);
  };
  RecordStore store(dir / "answers.jsonl");
  auto s = run_grid(endpoints, two_questions(), {PromptMode::RegularRag}, 1, flaky, store, fixed_clock("T"));
  CHECK(s.failed == 2);
  CHECK_FALSE(store.records()[0].ok);
  CHECK(store.records()[0].error.find("no context") != std::string::npos);
  fail = false;
  s = run_grid(endpoints, two_questions(), {PromptMode::RegularRag}, 1, flaky, store, fixed_clock("T"));
  CHECK(s.generated == 2);
  CHECK(store.records()[0].ok);
  CHECK(store.size() == 2);
}

TEST_CASE("http endpoint speaks the chat-completion protocol") {
  LocalServer local;
  std::atomic<int> calls{0};
  std::string seen_auth, seen_model;
  local.server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (calls++ == 0) {
      res.status = 429;
      res.set_header("Retry-After", "0");
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_model = nlohmann::json::parse(req.body).at("model").get<std::string>();
    res.set_content(R"({"choices":[{"message":{"role":"assistant","content":"hello"}}]})", "application/json");
  });
  local.server().Post("/api/chat", [&](const httplib::Request&, httplib::Response& res) {
    res.set_content(R"({"message":{"content":"from ollama"}})", "application/json");
  });
  ::setenv("LMDA_TEST_KEY", "secret-value", 1);
  EndpointConfig c;
  c.name = "remote";
  c.api = ChatApi::OpenAI;
  c.base_url = local.url() + "/v1";
  c.model = "model-x";
  c.auth_env = "LMDA_TEST_KEY";
  c.http.retry.base_delay = std::chrono::milliseconds(1);
  const auto endpoint = make_endpoint(c);
  CHECK(endpoint->generate("hi") == "hello");
  CHECK(calls == 2);
  CHECK(seen_auth == "Bearer secret-value");
  CHECK(seen_model == "model-x");

  c.api = ChatApi::Ollama;
  c.base_url = local.url();
  CHECK(make_endpoint(c)->generate("hi") == "from ollama");

  c.base_url = local.url() + "/missing";
  c.api = ChatApi::OpenAI;
  c.http.retry.attempts = 2;
  CHECK_THROWS_AS(make_endpoint(c)->generate("hi"), HttpError);
  ::unsetenv("LMDA_TEST_KEY");
}
