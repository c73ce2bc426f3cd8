#pragma once

#include <cstdint>
#include <numeric>
#include <string>

#include "mg/error.hpp"
#include "mg/params.hpp"

namespace mg {

/// Frequency plane P_q = { k : k2 * q_den == q_num * k1 } for rational q != 0.
class PlaneSpec {
 public:
  /// Reduces q_num/q_den to lowest terms. Throws InvalidPlane when q_num == 0
  /// or q_den <= 0.
  PlaneSpec(std::int64_t q_num, std::int64_t q_den) {
    if (q_num == 0) throw InvalidPlane("plane: q_num must be nonzero");
    if (q_den <= 0) throw InvalidPlane("plane: q_den must be positive");
    const std::int64_t g = std::gcd(q_num < 0 ? -q_num : q_num, q_den);
    num_ = q_num / g;
    den_ = q_den / g;
  }

  /// Parses "num/den" or a bare integer "num".
  static PlaneSpec parse(const std::string& text) {
    const auto slash = text.find('/');
    try {
      if (slash == std::string::npos) return PlaneSpec(std::stoll(text), 1);
      return PlaneSpec(std::stoll(text.substr(0, slash)),
                       std::stoll(text.substr(slash + 1)));
    } catch (const std::logic_error&) {
      throw InvalidPlane("plane: cannot parse '" + text + "'");
    }
  }

  std::int64_t q_num() const { return num_; }
  std::int64_t q_den() const { return den_; }
  double q() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  bool contains(const Wavevector& k) const { return k.k2 * den_ == num_ * k.k1; }

  std::string str() const { return std::to_string(num_) + "/" + std::to_string(den_); }

 private:
  std::int64_t num_;
  std::int64_t den_;
};

}  // namespace mg
