#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lmda/common.hpp"

namespace lmda {

struct PoleDescriptor {
  std::string short_label;
  std::string long_label;
  std::vector<std::string> vocabulary;
};

struct DimensionDescriptor {
  int dim_index = 1;  // 1-based
  PoleDescriptor positive;
  PoleDescriptor negative;

  const PoleDescriptor& pole(Pole p) const { return p == Pole::Positive ? positive : negative; }
  PoleDescriptor& pole(Pole p) { return p == Pole::Positive ? positive : negative; }
};

struct DescriptorSet {
  std::vector<DimensionDescriptor> dimensions;

  // Throws if `dim` is absent.
  const DimensionDescriptor& at(int dim) const;
  DimensionDescriptor& at(int dim);
};

// JSON: {"dimensions": [{"dim": 1, "positive": {"short_label", "long_label",
// "vocabulary": [...]}, "negative": {...}}]}
DescriptorSet parse_descriptors(std::string_view json_text);
DescriptorSet load_descriptors(const std::filesystem::path& path);
std::string descriptors_to_json(const DescriptorSet& set);

// Bundled labels for the COVID-19 treatment discourse dimensions.
std::filesystem::path default_descriptors_path();

}  // namespace lmda
