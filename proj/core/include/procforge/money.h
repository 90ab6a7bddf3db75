// Copyright 2026 The Procforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROCFORGE_MONEY_H_
#define PROCFORGE_MONEY_H_

#include <cmath>
#include <compare>
#include <cstdint>

namespace procforge {

/// A currency amount held as an integer count of micro-units (1e-6), so that
/// cost sums are exact and independent of summation order.
class Money {
 public:
  static constexpr std::int64_t kMicrosPerUnit = 1'000'000;

  constexpr Money() = default;

  static constexpr Money from_micros(std::int64_t micros) {
    Money m;
    m.micros_ = micros;
    return m;
  }
  /// Rounds to the nearest micro-unit.
  static Money from_units(double units) {
    return from_micros(std::llround(units * kMicrosPerUnit));
  }

  constexpr std::int64_t micros() const { return micros_; }
  constexpr double units() const {
    return static_cast<double>(micros_) / kMicrosPerUnit;
  }

  constexpr Money& operator+=(Money other) {
    micros_ += other.micros_;
    return *this;
  }
  friend constexpr Money operator+(Money a, Money b) { return a += b; }
  friend constexpr Money operator*(std::int64_t k, Money m) {
    return from_micros(k * m.micros_);
  }
  friend constexpr auto operator<=>(Money, Money) = default;

 private:
  std::int64_t micros_ = 0;
};

}  // namespace procforge

#endif  // PROCFORGE_MONEY_H_
