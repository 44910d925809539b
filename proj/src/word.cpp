#include "sslab/word.hpp"

#include <algorithm>
#include <sstream>

#include "sslab/errors.hpp"

namespace sslab {

double Word::min() const {
  if (empty()) fail(ErrorKind::domain, "min of empty word");
  return *std::min_element(symbols_.begin(), symbols_.end());
}

double Word::max() const {
  if (empty()) fail(ErrorKind::domain, "max of empty word");
  return *std::max_element(symbols_.begin(), symbols_.end());
}

Word Word::concat(const Word& other) const {
  std::vector<double> out;
  out.reserve(size() + other.size());
  out.insert(out.end(), symbols_.begin(), symbols_.end());
  out.insert(out.end(), other.symbols_.begin(), other.symbols_.end());
  return Word(std::move(out));
}

Word Word::power(std::size_t k) const {
  std::vector<double> out;
  out.reserve(size() * k);
  for (std::size_t i = 0; i < k; ++i) out.insert(out.end(), symbols_.begin(), symbols_.end());
  return Word(std::move(out));
}

Word Word::rotate(std::size_t shift) const {
  if (empty()) return {};
  std::vector<double> out(symbols_);
  std::rotate(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(shift % size()), out.end());
  return Word(std::move(out));
}

bool Word::starts_with(const Word& prefix) const {
  return prefix.size() <= size() &&
         std::equal(prefix.symbols_.begin(), prefix.symbols_.end(), symbols_.begin());
}

std::string Word::to_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < size(); ++i) os << (i ? "," : "") << symbols_[i];
  os << ']';
  return os.str();
}

}  // namespace sslab
