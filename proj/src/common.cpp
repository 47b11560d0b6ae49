#include "lmda/common.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>

namespace lmda {

namespace {

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

}  // namespace

std::string_view to_string(Subset s) {
  return s == Subset::Endorsed ? "endorsed" : "controversial";
}

std::string_view to_string(Pole p) {
  return p == Pole::Positive ? "positive" : "negative";
}

std::string_view pole_sign(Pole p) { return p == Pole::Positive ? "+" : "-"; }

Subset parse_subset(std::string_view text) {
  const auto t = lower_ascii(text);
  if (t == "endorsed" || t == "e") return Subset::Endorsed;
  if (t == "controversial" || t == "c") return Subset::Controversial;
  throw Error("unknown subset label '" + std::string(text) + "'");
}

Pole parse_pole(std::string_view text) {
  const auto t = lower_ascii(text);
  if (t == "pos" || t == "positive" || t == "+") return Pole::Positive;
  if (t == "neg" || t == "negative" || t == "-") return Pole::Negative;
  throw Error("unknown pole '" + std::string(text) + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write file '" + path.string() + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error("short write to '" + path.string() + "'");
}

std::string wrap_artifact(std::string_view magic, std::uint32_t version,
                          std::string_view payload) {
  if (magic.size() != 8) throw Error("artifact magic must be 8 bytes");
  std::string out(magic);
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((version >> (8 * i)) & 0xFF));
  out.append(payload);
  return out;
}

std::string unwrap_artifact(std::string_view magic, std::uint32_t version,
                            std::string_view bytes) {
  if (bytes.size() < 12 || bytes.substr(0, 8) != magic) {
    throw Error("not a " + std::string(magic) + " artifact");
  }
  std::uint32_t found = 0;
  for (int i = 0; i < 4; ++i) {
    found |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[8 + i])) << (8 * i);
  }
  if (found != version) {
    throw Error(std::string(magic) + " artifact version " + std::to_string(found) +
                " unsupported (expected " + std::to_string(version) + ")");
  }
  return std::string(bytes.substr(12));
}

void log_warning(std::string_view message) {
  static std::mutex mu;
  std::lock_guard lock(mu);
  std::cerr << "warning: " << message << '\n';
}

}  // namespace lmda
