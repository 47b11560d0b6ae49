#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/common.hpp"
#include "lmda/http.hpp"
#include "lmda/promptgen.hpp"

namespace lmda {

class ChatEndpoint {
 public:
  virtual ~ChatEndpoint() = default;
  virtual const std::string& name() const = 0;
  virtual double temperature() const = 0;
  virtual int max_tokens() const = 0;
  virtual std::size_t max_in_flight() const = 0;
  virtual std::string generate(const std::string& prompt) const = 0;
};

// Offline endpoint. Echoes the numbered passages of a prompt's CONTEXT or
// "Example texts" block, prefixed by the "Typical vocabulary" line when the
// prompt has one; prompts without passages get kNeutralAnswer. A positive
// max_tokens keeps only that many leading whitespace-separated words.
class MockEndpoint final : public ChatEndpoint {
 public:
  static constexpr std::string_view kNeutralAnswer =
      "There is not enough information available to give a definitive answer to this question.";

  explicit MockEndpoint(std::string name, std::size_t max_in_flight = 2, int max_tokens = 0);

  const std::string& name() const override { return name_; }
  double temperature() const override { return 0.0; }
  int max_tokens() const override { return max_tokens_; }
  std::size_t max_in_flight() const override { return in_flight_; }
  std::string generate(const std::string& prompt) const override;

 private:
  std::string name_;
  std::size_t in_flight_;
  int max_tokens_;
};

enum class ChatApi { Mock, OpenAI, Ollama, Gemini };
std::string_view to_string(ChatApi api);
ChatApi parse_chat_api(std::string_view text);

struct EndpointConfig {
  std::string name;  // unique label, e.g. "gpt-4o-mini"
  ChatApi api = ChatApi::Mock;
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string model;     // vendor model id; defaults to name
  std::string auth_env;  // environment variable holding the key
  double temperature = 0.7;
  int max_tokens = 512;
  std::size_t max_in_flight = 2;
  HttpOptions http;

  friend bool operator==(const EndpointConfig& a, const EndpointConfig& b);
};

// Chat-completion client; the vendor adapter decides path, headers and
// response shape.
class HttpChatEndpoint final : public ChatEndpoint {
 public:
  explicit HttpChatEndpoint(EndpointConfig config);

  const std::string& name() const override { return config_.name; }
  double temperature() const override { return config_.temperature; }
  int max_tokens() const override { return config_.max_tokens; }
  std::size_t max_in_flight() const override { return config_.max_in_flight; }
  std::string generate(const std::string& prompt) const override;

 private:
  EndpointConfig config_;
};

std::unique_ptr<ChatEndpoint> make_endpoint(const EndpointConfig& config);

struct Question {
  std::string id;
  std::string topic_id;
  DimPole dp;
  std::string text;
};

// JSON: {"questions": [{"id", "topic", "dim", "pole", "text"}]}
std::vector<Question> parse_questions(std::string_view json_text);
std::vector<Question> load_questions(const std::filesystem::path& path);
std::filesystem::path default_questions_path();

struct AnswerRecord {
  std::string model;
  DimPole dp;
  std::string topic_id;
  std::string question_id;
  PromptMode mode = PromptMode::RegularNoContext;
  int repeat_index = 0;
  std::string prompt_hash;  // SHA-256 hex of the rendered prompt
  std::string answer_text;
  std::string timestamp;
  double temperature = 0.0;
  int max_tokens = 0;
  bool ok = true;
  std::string error;

  std::string key() const;
  friend bool operator==(const AnswerRecord&, const AnswerRecord&) = default;
};

std::string record_to_json_line(const AnswerRecord& r);
AnswerRecord record_from_json_line(std::string_view line);

// Append-only JSON-lines store indexed by AnswerRecord::key(). A later
// successful record supersedes an earlier failed one for the same key.
class RecordStore {
 public:
  explicit RecordStore(std::filesystem::path path);

  bool has_success(const std::string& key) const;
  void append(const AnswerRecord& r);
  // Latest record per key, in first-seen order.
  std::vector<AnswerRecord> records() const;
  std::size_t size() const { return order_.size(); }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
  std::vector<std::string> order_;
  std::map<std::string, AnswerRecord> latest_;
};

std::vector<AnswerRecord> load_records(const std::filesystem::path& path);

using Clock = std::function<std::string()>;
Clock system_clock_utc();
Clock fixed_clock(std::string timestamp);

// Renders the prompt for one cell. May throw (for instance NoContextError),
// which records a failed row.
using PromptBuilder = std::function<std::string(const Question&, PromptMode)>;

struct GridSummary {
  std::size_t planned = 0;
  std::size_t skipped = 0;
  std::size_t generated = 0;
  std::size_t failed = 0;
};

// Cross product endpoints x questions x modes x repeats. Cells already
// successful in the store are skipped; each endpoint runs with its own
// in-flight bound and results are committed in cell order.
GridSummary run_grid(const std::vector<const ChatEndpoint*>& endpoints,
                     const std::vector<Question>& questions, const std::vector<PromptMode>& modes,
                     int repeats, const PromptBuilder& build_prompt, RecordStore& store,
                     const Clock& clock);

}  // namespace lmda
