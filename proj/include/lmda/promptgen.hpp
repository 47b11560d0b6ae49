#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/common.hpp"
#include "lmda/descriptors.hpp"

namespace lmda {

enum class PromptMode { RegularNoContext, RegularRag, EnhancedNoContext, EnhancedRag };

// "regular-nocontext", "regular-rag", "enhanced-nocontext", "enhanced-rag"
std::string_view to_string(PromptMode mode);
PromptMode parse_prompt_mode(std::string_view text);
bool is_rag(PromptMode mode);
bool is_enhanced(PromptMode mode);
const std::vector<PromptMode>& all_prompt_modes();

struct PromptBundle {
  std::string question;
  std::vector<std::string> passages;  // retrieval rank order
  PromptMode mode = PromptMode::RegularNoContext;
  std::optional<DimensionDescriptor> descriptor;
  Pole pole = Pole::Positive;
};

// Template syntax: "{name}" substitutes a field; "{#context}...{/context}"
// is kept for Rag modes and dropped otherwise. Unknown fields are errors.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& fields,
                            bool with_context);

struct PromptTemplates {
  std::string regular;
  std::string enhanced;

  static PromptTemplates load(const std::filesystem::path& dir);
};

std::filesystem::path default_templates_dir();

// Passages render as "[i] text", one per line, inner whitespace collapsed.
std::string format_passages(const std::vector<std::string>& passages);

std::string render_regular(const PromptBundle& bundle, const PromptTemplates& templates);
std::string render_enhanced(const PromptBundle& bundle, const PromptTemplates& templates);
// Dispatches on bundle.mode.
std::string render(const PromptBundle& bundle, const PromptTemplates& templates);

}  // namespace lmda
