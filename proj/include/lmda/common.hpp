#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lmda {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Subset { Endorsed, Controversial };
enum class Pole { Positive, Negative };

std::string_view to_string(Subset s);
std::string_view to_string(Pole p);
Subset parse_subset(std::string_view text);
// Accepts "pos", "positive", "+", "neg", "negative", "-".
Pole parse_pole(std::string_view text);
// "+" or "-"
std::string_view pole_sign(Pole p);

// A (dimension, pole) address; dimensions are 1-based.
struct DimPole {
  int dim = 1;
  Pole pole = Pole::Positive;

  friend bool operator==(const DimPole&, const DimPole&) = default;
  friend auto operator<=>(const DimPole& a, const DimPole& b) {
    if (a.dim != b.dim) return a.dim <=> b.dim;
    return static_cast<int>(a.pole) <=> static_cast<int>(b.pole);
  }
};

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

// Versioned binary container: 8-byte magic, little-endian u32 version, payload.
std::string wrap_artifact(std::string_view magic, std::uint32_t version,
                          std::string_view payload);
// Throws Error if the magic or version does not match.
std::string unwrap_artifact(std::string_view magic, std::uint32_t version,
                            std::string_view bytes);

void log_warning(std::string_view message);

}  // namespace lmda
