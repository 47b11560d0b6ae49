#include "lmda/promptgen.hpp"

#include <array>
#include <cctype>

namespace lmda {

namespace {

constexpr std::string_view kOpen = "{#context}";
constexpr std::string_view kClose = "{/context}";

void check_passages(const PromptBundle& b) {
  if (b.question.empty()) throw Error("prompt question is empty");
  if (is_rag(b.mode) && b.passages.empty()) {
    throw Error("mode " + std::string(to_string(b.mode)) + " requires at least one passage");
  }
  if (!is_rag(b.mode) && !b.passages.empty()) {
    throw Error("mode " + std::string(to_string(b.mode)) + " takes no passages");
  }
}

std::string join(const std::vector<std::string>& items, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

}  // namespace

std::string_view to_string(PromptMode mode) {
  switch (mode) {
    case PromptMode::RegularNoContext: return "regular-nocontext";
    case PromptMode::RegularRag: return "regular-rag";
    case PromptMode::EnhancedNoContext: return "enhanced-nocontext";
    case PromptMode::EnhancedRag: return "enhanced-rag";
  }
  return "unknown";
}

PromptMode parse_prompt_mode(std::string_view text) {
  for (auto m : all_prompt_modes()) {
    if (to_string(m) == text) return m;
  }
  throw Error("unknown prompt mode '" + std::string(text) + "'");
}

bool is_rag(PromptMode mode) { return mode == PromptMode::RegularRag || mode == PromptMode::EnhancedRag; }

bool is_enhanced(PromptMode mode) {
  return mode == PromptMode::EnhancedNoContext || mode == PromptMode::EnhancedRag;
}

const std::vector<PromptMode>& all_prompt_modes() {
  static const std::vector<PromptMode> modes{PromptMode::RegularNoContext, PromptMode::RegularRag,
                                             PromptMode::EnhancedNoContext, PromptMode::EnhancedRag};
  return modes;
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& fields,
                            bool with_context) {
  std::string out;
  bool in_section = false;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl.substr(i, kOpen.size()) == kOpen) {
      if (in_section) throw Error("nested {#context} section in template");
      in_section = true;
      i += kOpen.size();
      continue;
    }
    if (tmpl.substr(i, kClose.size()) == kClose) {
      if (!in_section) throw Error("unbalanced {/context} in template");
      in_section = false;
      i += kClose.size();
      continue;
    }
    const bool emit = !in_section || with_context;
    if (tmpl[i] == '{') {
      const auto end = tmpl.find('}', i);
      if (end == std::string_view::npos) throw Error("unterminated placeholder in template");
      const std::string name(tmpl.substr(i + 1, end - i - 1));
      const auto it = fields.find(name);
      if (it == fields.end()) throw Error("template references unknown field '" + name + "'");
      if (emit) out += it->second;
      i = end + 1;
      continue;
    }
    if (emit) out.push_back(tmpl[i]);
    ++i;
  }
  if (in_section) throw Error("unterminated {#context} section in template");
  return out;
}

PromptTemplates PromptTemplates::load(const std::filesystem::path& dir) {
  return {read_file(dir / "regular.txt"), read_file(dir / "enhanced.txt")};
}

std::filesystem::path default_templates_dir() {
  return std::filesystem::path(LMDA_DATA_DIR) / "templates";
}

std::string format_passages(const std::vector<std::string>& passages) {
  std::string out;
  for (std::size_t i = 0; i < passages.size(); ++i) {
    if (i) out.push_back('\n');
    out += "[" + std::to_string(i + 1) + "] ";
    bool space = false;
    std::string line;
    for (unsigned char c : passages[i]) {
      if (std::isspace(c)) {
        space = !line.empty();
      } else {
        if (space) line.push_back(' ');
        space = false;
        line.push_back(static_cast<char>(c));
      }
    }
    out += line;
  }
  return out;
}

std::string render_regular(const PromptBundle& bundle, const PromptTemplates& templates) {
  if (is_enhanced(bundle.mode)) throw Error("render_regular called with an enhanced mode");
  check_passages(bundle);
  const std::map<std::string, std::string> fields{{"query", bundle.question},
                                                  {"question", bundle.question},
                                                  {"passages", format_passages(bundle.passages)}};
  return render_template(templates.regular, fields, is_rag(bundle.mode));
}

std::string render_enhanced(const PromptBundle& bundle, const PromptTemplates& templates) {
  if (!is_enhanced(bundle.mode)) throw Error("render_enhanced called with a regular mode");
  check_passages(bundle);
  if (!bundle.descriptor) throw Error("enhanced prompt requires a dimension descriptor");
  const auto& pole = bundle.descriptor->pole(bundle.pole);
  const std::array<std::pair<std::string_view, bool>, 3> present{
      {{"label", !pole.short_label.empty()},
       {"description", !pole.long_label.empty()},
       {"vocabulary", !pole.vocabulary.empty()}}};
  for (const auto& [field, ok] : present) {
    if (!ok) {
      throw Error("descriptor for dimension " + std::to_string(bundle.descriptor->dim_index) +
                  std::string(pole_sign(bundle.pole)) + " is missing field '" + std::string(field) + "'");
    }
  }
  const std::map<std::string, std::string> fields{{"query", bundle.question},
                                                  {"question", bundle.question},
                                                  {"label", pole.short_label},
                                                  {"description", pole.long_label},
                                                  {"vocab", join(pole.vocabulary, ", ")},
                                                  {"passages", format_passages(bundle.passages)}};
  return render_template(templates.enhanced, fields, is_rag(bundle.mode));
}

std::string render(const PromptBundle& bundle, const PromptTemplates& templates) {
  return is_enhanced(bundle.mode) ? render_enhanced(bundle, templates) : render_regular(bundle, templates);
}

}  // namespace lmda
