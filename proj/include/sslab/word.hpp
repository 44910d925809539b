#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace sslab {

/// Finite block of potential values. Words are values, compared symbol by
/// symbol; symbols are exact copies of alphabet entries, so == is exact.
class Word {
 public:
  Word() = default;
  Word(std::initializer_list<double> symbols) : symbols_(symbols) {}
  explicit Word(std::vector<double> symbols) : symbols_(std::move(symbols)) {}

  std::size_t size() const noexcept { return symbols_.size(); }
  bool empty() const noexcept { return symbols_.empty(); }
  double operator[](std::size_t i) const { return symbols_[i]; }
  const std::vector<double>& symbols() const noexcept { return symbols_; }
  std::span<const double> view() const noexcept { return symbols_; }
  operator std::span<const double>() const noexcept { return symbols_; }

  double min() const;
  double max() const;

  Word concat(const Word& other) const;
  Word power(std::size_t k) const;
  Word rotate(std::size_t shift) const;
  bool starts_with(const Word& prefix) const;

  friend bool operator==(const Word&, const Word&) = default;

  std::string to_string() const;

 private:
  std::vector<double> symbols_;
};

}  // namespace sslab
