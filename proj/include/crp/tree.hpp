#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "crp/errors.hpp"

namespace crp {

// A word over {0,1}: the try-bits r(1)...r(t) heard so far. Stored as
// (length, binary value) with the first bit most significant.
class Word {
 public:
  static constexpr unsigned kMaxLength = 62;

  constexpr Word() = default;

  Word(unsigned length, std::uint64_t value) : length_(length), value_(value) {
    if (length > kMaxLength) throw InvalidArgument("word too long");
    if (value >> length != 0) {
      throw InvalidArgument("word value does not fit its length");
    }
  }

  static Word from_string(std::string_view bits) {
    if (bits.size() > kMaxLength) throw InvalidArgument("word too long");
    std::uint64_t v = 0;
    for (char c : bits) {
      if (c != '0' && c != '1') {
        throw InvalidArgument("word must contain only '0' and '1': '" +
                              std::string(bits) + "'");
      }
      v = (v << 1) | static_cast<std::uint64_t>(c == '1');
    }
    return Word(static_cast<unsigned>(bits.size()), v);
  }

  constexpr unsigned length() const noexcept { return length_; }
  constexpr std::uint64_t value() const noexcept { return value_; }

  Word append(bool bit) const {
    return Word(length_ + 1, (value_ << 1) | static_cast<std::uint64_t>(bit));
  }

  // Bit at position i (0 = first try-bit).
  constexpr bool bit(unsigned i) const noexcept {
    return ((value_ >> (length_ - 1 - i)) & 1U) != 0;
  }

  std::string to_string() const {
    std::string s(length_, '0');
    for (unsigned i = 0; i < length_; ++i) {
      if (bit(i)) s[i] = '1';
    }
    return s;
  }

  friend constexpr bool operator==(const Word&, const Word&) = default;

 private:
  unsigned length_ = 0;
  std::uint64_t value_ = 0;
};

// Break points 0 = z_0 < z_1 < ... < z_m = 1.
class Partition {
 public:
  explicit Partition(std::vector<double> points) : points_(std::move(points)) {
    if (points_.size() < 2) {
      throw InvalidArgument("partition needs at least two points");
    }
    if (points_.front() != 0.0 || points_.back() != 1.0) {
      throw InvalidArgument("partition must start at 0 and end at 1");
    }
    for (std::size_t i = 1; i < points_.size(); ++i) {
      if (!(points_[i] > points_[i - 1])) {
        throw InvalidArgument("partition points must be strictly increasing");
      }
    }
  }

  static Partition uniform(std::size_t pieces) {
    if (pieces == 0) throw InvalidArgument("partition needs at least one piece");
    std::vector<double> z(pieces + 1);
    for (std::size_t i = 0; i <= pieces; ++i) {
      z[i] = static_cast<double>(i) / static_cast<double>(pieces);
    }
    z.back() = 1.0;
    return Partition(std::move(z));
  }

  const std::vector<double>& points() const noexcept { return points_; }
  std::size_t pieces() const noexcept { return points_.size() - 1; }
  double operator[](std::size_t i) const { return points_.at(i); }

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<double> points_;
};

// Emission probabilities p_w for every word of length 0..depth-1, stored in
// heap order: index(w) = 2^l(w) - 1 + #(w).
class ProbabilityTree {
 public:
  static constexpr unsigned kMaxDepth = 24;

  ProbabilityTree(unsigned depth, std::vector<double> probs)
      : depth_(depth), probs_(std::move(probs)) {
    if (depth < 1 || depth > kMaxDepth) {
      throw InvalidArgument("tree depth must lie in [1, " +
                            std::to_string(kMaxDepth) + "]");
    }
    if (probs_.size() != (std::size_t{1} << depth) - 1) {
      throw InvalidArgument("tree of depth " + std::to_string(depth) +
                            " needs exactly 2^k - 1 probabilities");
    }
    for (double p : probs_) {
      if (!(p > 0.0 && p < 1.0)) {
        throw InvalidArgument("emission probability outside (0, 1)");
      }
    }
  }

  static ProbabilityTree from_function(
      unsigned depth, const std::function<double(const Word&)>& prob_of) {
    if (depth < 1 || depth > kMaxDepth) {
      throw InvalidArgument("tree depth out of range");
    }
    std::vector<double> probs;
    probs.reserve((std::size_t{1} << depth) - 1);
    for (unsigned l = 0; l < depth; ++l) {
      for (std::uint64_t v = 0; v < (std::uint64_t{1} << l); ++v) {
        probs.push_back(prob_of(Word(l, v)));
      }
    }
    return ProbabilityTree(depth, std::move(probs));
  }

  unsigned depth() const noexcept { return depth_; }
  std::size_t size() const noexcept { return probs_.size(); }
  std::size_t leaves() const noexcept { return std::size_t{1} << depth_; }
  const std::vector<double>& probabilities() const noexcept { return probs_; }

  static std::size_t index_of(const Word& w) noexcept {
    return (std::size_t{1} << w.length()) - 1 + w.value();
  }

  double p(const Word& w) const {
    if (w.length() >= depth_) {
      throw InvalidArgument("word '" + w.to_string() +
                            "' has no probability in a depth-" +
                            std::to_string(depth_) + " tree");
    }
    return probs_[index_of(w)];
  }

  friend bool operator==(const ProbabilityTree&,
                         const ProbabilityTree&) = default;

 private:
  unsigned depth_;
  std::vector<double> probs_;
};

namespace detail {

// Walks the prefixes of w, returning (y_w, delta_w). Uses y_{u0} = y_u and
// y_{u1} = y_u + delta_{u0}.
inline std::pair<double, double> walk(const ProbabilityTree& tree,
                                      const Word& w) {
  if (w.length() > tree.depth()) {
    throw InvalidArgument("word '" + w.to_string() + "' is longer than depth " +
                          std::to_string(tree.depth()));
  }
  double y = 0.0;
  double d = 1.0;
  Word prefix;
  for (unsigned i = 0; i < w.length(); ++i) {
    const double p = tree.p(prefix);
    const bool b = w.bit(i);
    if (b) {
      y += (1.0 - p) * d;
      d *= p;
    } else {
      d *= 1.0 - p;
    }
    prefix = prefix.append(b);
  }
  return {y, d};
}

}  // namespace detail

// delta_w: width of the interval assigned to w; delta of the empty word is 1.
inline double delta(const ProbabilityTree& tree, const Word& w) {
  return detail::walk(tree, w).second;
}

// y_w: sum of delta_v over words v of the same length with #(v) < #(w).
inline double y_cum(const ProbabilityTree& tree, const Word& w) {
  return detail::walk(tree, w).first;
}

namespace detail {

inline unsigned log2_exact(std::size_t m) {
  if (m == 0 || (m & (m - 1)) != 0) {
    throw InvalidArgument("partition size " + std::to_string(m) +
                          " is not a power of two");
  }
  unsigned k = 0;
  while ((std::size_t{1} << k) < m) ++k;
  return k;
}

}  // namespace detail

// p_w = (z_{a+s} - z_{a+s/2}) / (z_{a+s} - z_a) with s = 2^(k-l(w)) and
// a = #(w) s, so that y_w = z_a for every word.
inline ProbabilityTree partition_to_tree(const Partition& partition) {
  const auto& z = partition.points();
  const unsigned k = detail::log2_exact(partition.pieces());
  if (k == 0) throw InvalidArgument("partition must have at least two pieces");
  return ProbabilityTree::from_function(k, [&](const Word& w) {
    const std::size_t s = std::size_t{1} << (k - w.length());
    const std::size_t a = static_cast<std::size_t>(w.value()) * s;
    return (z[a + s] - z[a + s / 2]) / (z[a + s] - z[a]);
  });
}

// z_{#(w)} = y_w over words of length k, z_m = 1.
inline Partition tree_to_partition(const ProbabilityTree& tree) {
  const unsigned k = tree.depth();
  std::vector<double> z(tree.leaves() + 1);
  // Depth-first over (word, y, delta); leaves fill z.
  struct Frame {
    Word w;
    double y;
    double d;
  };
  std::vector<Frame> stack{{Word(), 0.0, 1.0}};
  while (!stack.empty()) {
    const Frame f = stack.back();
    stack.pop_back();
    if (f.w.length() == k) {
      z[static_cast<std::size_t>(f.w.value())] = f.y;
      continue;
    }
    const double p = tree.p(f.w);
    stack.push_back({f.w.append(true), f.y + (1.0 - p) * f.d, p * f.d});
    stack.push_back({f.w.append(false), f.y, (1.0 - p) * f.d});
  }
  z.back() = 1.0;
  return Partition(std::move(z));
}

// Emission probabilities of CONTI: one value per round, independent of the
// try-bits heard.
inline constexpr std::array<double, 6> kContiLevels = {0.07, 0.2,  0.25,
                                                       0.33, 0.4, 0.5};

inline ProbabilityTree conti_tree() {
  return ProbabilityTree::from_function(
      static_cast<unsigned>(kContiLevels.size()),
      [](const Word& w) { return kContiLevels[w.length()]; });
}

// Every word of length `length`, in increasing binary value.
inline std::vector<Word> words_of_length(unsigned length) {
  std::vector<Word> out;
  out.reserve(std::size_t{1} << length);
  for (std::uint64_t v = 0; v < (std::uint64_t{1} << length); ++v) {
    out.emplace_back(length, v);
  }
  return out;
}

}  // namespace crp
