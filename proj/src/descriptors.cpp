#include "lmda/descriptors.hpp"

#include <nlohmann/json.hpp>

namespace lmda {

namespace {

PoleDescriptor parse_pole_descriptor(const nlohmann::json& j) {
  PoleDescriptor p;
  p.short_label = j.value("short_label", "");
  p.long_label = j.value("long_label", "");
  p.vocabulary = j.value("vocabulary", std::vector<std::string>{});
  return p;
}

nlohmann::json pole_json(const PoleDescriptor& p) {
  return {{"short_label", p.short_label}, {"long_label", p.long_label}, {"vocabulary", p.vocabulary}};
}

}  // namespace

const DimensionDescriptor& DescriptorSet::at(int dim) const {
  for (const auto& d : dimensions) {
    if (d.dim_index == dim) return d;
  }
  throw Error("no descriptor for dimension " + std::to_string(dim));
}

DimensionDescriptor& DescriptorSet::at(int dim) {
  return const_cast<DimensionDescriptor&>(std::as_const(*this).at(dim));
}

DescriptorSet parse_descriptors(std::string_view json_text) try {
  const auto j = nlohmann::json::parse(json_text);
  DescriptorSet set;
  for (const auto& d : j.at("dimensions")) {
    DimensionDescriptor dd;
    dd.dim_index = d.at("dim").get<int>();
    if (dd.dim_index < 1) throw Error("descriptor dimension indices are 1-based");
    dd.positive = parse_pole_descriptor(d.at("positive"));
    dd.negative = parse_pole_descriptor(d.at("negative"));
    for (const auto& existing : set.dimensions) {
      if (existing.dim_index == dd.dim_index) {
        throw Error("duplicate descriptor for dimension " + std::to_string(dd.dim_index));
      }
    }
    set.dimensions.push_back(std::move(dd));
  }
  return set;
} catch (const nlohmann::json::exception& e) {
  throw Error(std::string("malformed descriptors file: ") + e.what());
}

DescriptorSet load_descriptors(const std::filesystem::path& path) {
  return parse_descriptors(read_file(path));
}

std::string descriptors_to_json(const DescriptorSet& set) {
  nlohmann::json j;
  auto& dims = j["dimensions"] = nlohmann::json::array();
  for (const auto& d : set.dimensions) {
    dims.push_back({{"dim", d.dim_index},
                    {"positive", pole_json(d.positive)},
                    {"negative", pole_json(d.negative)}});
  }
  return j.dump(2) + "\n";
}

std::filesystem::path default_descriptors_path() {
  return std::filesystem::path(LMDA_DATA_DIR) / "descriptors" / "covid-treatments.json";
}

}  // namespace lmda
