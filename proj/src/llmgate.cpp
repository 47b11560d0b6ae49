#include "lmda/llmgate.hpp"

#include <cctype>
#include <chrono>
#include <ctime>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "lmda/digest.hpp"
#include "lmda/parallel.hpp"

namespace lmda {

namespace {

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.emplace_back(text.substr(start));
      break;
    }
    lines.emplace_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

// "[12] text" -> "text"
std::optional<std::string> passage_body(const std::string& line) {
  if (line.size() < 4 || line[0] != '[') return std::nullopt;
  std::size_t i = 1;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
  if (i == 1 || i + 1 >= line.size() || line[i] != ']' || line[i + 1] != ' ') return std::nullopt;
  return line.substr(i + 2);
}

}  // namespace

MockEndpoint::MockEndpoint(std::string name, std::size_t max_in_flight, int max_tokens)
    : name_(std::move(name)), in_flight_(max_in_flight), max_tokens_(max_tokens) {
  if (max_tokens < 0) throw Error("mock endpoint '" + name_ + "': max_tokens must be >= 0");
}

std::string MockEndpoint::generate(const std::string& prompt) const {
  const auto lines = split_lines(prompt);
  std::string vocabulary;
  std::vector<std::string> passages;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i] == "Typical vocabulary:" && i + 1 < lines.size()) vocabulary = lines[i + 1];
    if (lines[i] == "CONTEXT:" || lines[i] == "Example texts:") {
      for (std::size_t j = i + 1; j < lines.size(); ++j) {
        auto body = passage_body(lines[j]);
        if (!body) break;
        passages.push_back(std::move(*body));
      }
    }
  }
  if (passages.empty()) return std::string(kNeutralAnswer);
  std::string out;
  if (!vocabulary.empty()) out = vocabulary + ".";
  for (const auto& p : passages) {
    if (!out.empty()) out.push_back(' ');
    out += p;
  }
  if (max_tokens_ > 0) {
    std::istringstream words(out);
    std::string word, kept;
    for (int n = 0; n < max_tokens_ && words >> word; ++n) {
      if (!kept.empty()) kept.push_back(' ');
      kept += word;
    }
    out = std::move(kept);
  }
  return out;
}

std::string_view to_string(ChatApi api) {
  switch (api) {
    case ChatApi::Mock: return "mock";
    case ChatApi::OpenAI: return "openai";
    case ChatApi::Ollama: return "ollama";
    case ChatApi::Gemini: return "gemini";
  }
  return "unknown";
}

ChatApi parse_chat_api(std::string_view text) {
  for (auto api : {ChatApi::Mock, ChatApi::OpenAI, ChatApi::Ollama, ChatApi::Gemini}) {
    if (to_string(api) == text) return api;
  }
  throw Error("unknown chat api '" + std::string(text) + "'");
}

bool operator==(const EndpointConfig& a, const EndpointConfig& b) {
  return a.name == b.name && a.api == b.api && a.base_url == b.base_url && a.model == b.model &&
         a.auth_env == b.auth_env && a.temperature == b.temperature && a.max_tokens == b.max_tokens &&
         a.max_in_flight == b.max_in_flight && a.http.retry.attempts == b.http.retry.attempts &&
         a.http.retry.base_delay == b.http.retry.base_delay && a.http.timeout == b.http.timeout;
}

HttpChatEndpoint::HttpChatEndpoint(EndpointConfig config) : config_(std::move(config)) {
  if (config_.api == ChatApi::Mock) throw Error("HttpChatEndpoint cannot use the mock api");
  if (config_.base_url.empty()) throw Error("endpoint '" + config_.name + "' has no base_url");
  if (config_.model.empty()) config_.model = config_.name;
}

std::string HttpChatEndpoint::generate(const std::string& prompt) const {
  const auto key = secret_from_env(config_.auth_env);
  Headers headers;
  nlohmann::json body;
  std::string path;
  const nlohmann::json messages = nlohmann::json::array({{{"role", "user"}, {"content", prompt}}});
  switch (config_.api) {
    case ChatApi::OpenAI:
      path = "/chat/completions";
      body = {{"model", config_.model},
              {"messages", messages},
              {"temperature", config_.temperature},
              {"max_tokens", config_.max_tokens}};
      if (!key.empty()) headers.emplace_back("Authorization", "Bearer " + key);
      break;
    case ChatApi::Ollama:
      path = "/api/chat";
      body = {{"model", config_.model},
              {"messages", messages},
              {"stream", false},
              {"options", {{"temperature", config_.temperature}, {"num_predict", config_.max_tokens}}}};
      if (!key.empty()) headers.emplace_back("Authorization", "Bearer " + key);
      break;
    case ChatApi::Gemini:
      path = "/models/" + config_.model + ":generateContent";
      body = {{"contents", nlohmann::json::array({{{"role", "user"}, {"parts", {{{"text", prompt}}}}}})},
              {"generationConfig",
               {{"temperature", config_.temperature}, {"maxOutputTokens", config_.max_tokens}}}};
      if (!key.empty()) headers.emplace_back("x-goog-api-key", key);
      break;
    case ChatApi::Mock:
      break;
  }
  const auto response = nlohmann::json::parse(post_json(config_.base_url, path, body.dump(), headers, config_.http));
  try {
    switch (config_.api) {
      case ChatApi::OpenAI:
        return response.at("choices").at(0).at("message").at("content").get<std::string>();
      case ChatApi::Ollama:
        return response.at("message").at("content").get<std::string>();
      case ChatApi::Gemini: {
        std::string text;
        for (const auto& part : response.at("candidates").at(0).at("content").at("parts")) {
          text += part.value("text", "");
        }
        return text;
      }
      case ChatApi::Mock:
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error("endpoint '" + config_.name + "' returned an unexpected response: " + e.what());
  }
  return {};
}

std::unique_ptr<ChatEndpoint> make_endpoint(const EndpointConfig& config) {
  if (config.api == ChatApi::Mock) return std::make_unique<MockEndpoint>(config.name, config.max_in_flight, config.max_tokens);
  return std::make_unique<HttpChatEndpoint>(config);
}

std::vector<Question> parse_questions(std::string_view json_text) {
  std::vector<Question> out;
  std::set<std::string> ids;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& q : j.at("questions")) {
      Question item;
      item.id = q.at("id").get<std::string>();
      item.topic_id = q.at("topic").get<std::string>();
      item.dp = {q.at("dim").get<int>(), parse_pole(q.at("pole").get<std::string>())};
      item.text = q.at("text").get<std::string>();
      if (item.text.empty()) throw Error("question '" + item.id + "' has empty text");
      if (!ids.insert(item.id).second) throw Error("duplicate question id '" + item.id + "'");
      out.push_back(std::move(item));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed questions file: ") + e.what());
  }
  return out;
}

std::vector<Question> load_questions(const std::filesystem::path& path) {
  return parse_questions(read_file(path));
}

std::filesystem::path default_questions_path() {
  return std::filesystem::path(LMDA_DATA_DIR) / "questions" / "covid-treatments.json";
}

std::string AnswerRecord::key() const {
  return model + "|" + std::to_string(dp.dim) + std::string(pole_sign(dp.pole)) + "|" + question_id +
         "|" + std::string(to_string(mode)) + "|" + std::to_string(repeat_index);
}

std::string record_to_json_line(const AnswerRecord& r) {
  nlohmann::ordered_json j;
  j["model"] = r.model;
  j["dim"] = r.dp.dim;
  j["pole"] = std::string(to_string(r.dp.pole));
  j["topic_id"] = r.topic_id;
  j["question_id"] = r.question_id;
  j["mode"] = std::string(to_string(r.mode));
  j["repeat_index"] = r.repeat_index;
  j["prompt_hash"] = r.prompt_hash;
  j["answer_text"] = r.answer_text;
  j["timestamp"] = r.timestamp;
  j["temperature"] = r.temperature;
  j["max_tokens"] = r.max_tokens;
  j["ok"] = r.ok;
  j["error"] = r.error;
  return j.dump();
}

AnswerRecord record_from_json_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  AnswerRecord r;
  r.model = j.at("model").get<std::string>();
  r.dp = {j.at("dim").get<int>(), parse_pole(j.at("pole").get<std::string>())};
  r.topic_id = j.at("topic_id").get<std::string>();
  r.question_id = j.at("question_id").get<std::string>();
  r.mode = parse_prompt_mode(j.at("mode").get<std::string>());
  r.repeat_index = j.at("repeat_index").get<int>();
  r.prompt_hash = j.at("prompt_hash").get<std::string>();
  r.answer_text = j.at("answer_text").get<std::string>();
  r.timestamp = j.at("timestamp").get<std::string>();
  r.temperature = j.at("temperature").get<double>();
  r.max_tokens = j.at("max_tokens").get<int>();
  r.ok = j.at("ok").get<bool>();
  r.error = j.at("error").get<std::string>();
  return r;
}

RecordStore::RecordStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    AnswerRecord r;
    try {
      r = record_from_json_line(line);
    } catch (const std::exception& e) {
      throw Error(path_.string() + ":" + std::to_string(number) + ": malformed record: " + e.what());
    }
    const auto k = r.key();
    auto it = latest_.find(k);
    if (it == latest_.end()) {
      order_.push_back(k);
      latest_.emplace(k, std::move(r));
    } else if (!it->second.ok) {
      it->second = std::move(r);
    }
  }
}

bool RecordStore::has_success(const std::string& key) const {
  std::lock_guard lock(mu_);
  const auto it = latest_.find(key);
  return it != latest_.end() && it->second.ok;
}

void RecordStore::append(const AnswerRecord& r) {
  std::lock_guard lock(mu_);
  const auto k = r.key();
  auto it = latest_.find(k);
  if (it != latest_.end() && it->second.ok) throw Error("record '" + k + "' already stored");
  if (!path_.parent_path().empty()) std::filesystem::create_directories(path_.parent_path());
  std::ofstream out(path_, std::ios::binary | std::ios::app);
  out << record_to_json_line(r) << '\n';
  out.flush();
  if (!out) throw Error("cannot append to record store '" + path_.string() + "'");
  if (it == latest_.end()) {
    order_.push_back(k);
    latest_.emplace(k, r);
  } else {
    it->second = r;
  }
}

std::vector<AnswerRecord> RecordStore::records() const {
  std::lock_guard lock(mu_);
  std::vector<AnswerRecord> out;
  out.reserve(order_.size());
  for (const auto& k : order_) out.push_back(latest_.at(k));
  return out;
}

std::vector<AnswerRecord> load_records(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw Error("record store '" + path.string() + "' not found");
  return RecordStore(path).records();
}

Clock system_clock_utc() {
  return [] {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return std::string(buf);
  };
}

Clock fixed_clock(std::string timestamp) {
  return [t = std::move(timestamp)] { return t; };
}

GridSummary run_grid(const std::vector<const ChatEndpoint*>& endpoints,
                     const std::vector<Question>& questions, const std::vector<PromptMode>& modes,
                     int repeats, const PromptBuilder& build_prompt, RecordStore& store,
                     const Clock& clock) {
  if (repeats < 1) throw Error("repeats must be positive");
  std::set<std::string> names;
  for (const auto* e : endpoints) {
    if (!names.insert(e->name()).second) throw Error("duplicate endpoint name '" + e->name() + "'");
  }
  GridSummary summary;
  for (const auto* endpoint : endpoints) {
    std::vector<AnswerRecord> pending;
    for (const auto& q : questions) {
      for (const auto mode : modes) {
        for (int r = 0; r < repeats; ++r) {
          ++summary.planned;
          AnswerRecord rec;
          rec.model = endpoint->name();
          rec.dp = q.dp;
          rec.topic_id = q.topic_id;
          rec.question_id = q.id;
          rec.mode = mode;
          rec.repeat_index = r;
          rec.temperature = endpoint->temperature();
          rec.max_tokens = endpoint->max_tokens();
          if (store.has_success(rec.key())) {
            ++summary.skipped;
            continue;
          }
          pending.push_back(std::move(rec));
        }
      }
    }
    std::map<std::string, const Question*> by_id;
    for (const auto& q : questions) by_id[q.id] = &q;
    const std::size_t block = std::max<std::size_t>(1, endpoint->max_in_flight()) * 8;
    for (std::size_t start = 0; start < pending.size(); start += block) {
      const std::size_t count = std::min(block, pending.size() - start);
      parallel_for(count, endpoint->max_in_flight(), [&](std::size_t i) {
        auto& rec = pending[start + i];
        try {
          const auto prompt = build_prompt(*by_id.at(rec.question_id), rec.mode);
          rec.prompt_hash = sha256_hex(prompt);
          rec.answer_text = endpoint->generate(prompt);
          rec.ok = true;
        } catch (const std::exception& e) {
          rec.ok = false;
          rec.error = e.what();
          rec.answer_text.clear();
        }
        rec.timestamp = clock();
      });
      for (std::size_t i = 0; i < count; ++i) {
        const auto& rec = pending[start + i];
        store.append(rec);
        if (rec.ok) {
          ++summary.generated;
        } else {
          ++summary.failed;
          log_warning("cell " + rec.key() + " failed: " + rec.error);
        }
      }
    }
  }
  return summary;
}

}  // namespace lmda
