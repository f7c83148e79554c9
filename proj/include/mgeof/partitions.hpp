#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace mgeof {

/// A disjoint cover of the modes {0..N-1}. Stored canonically: each block
/// sorted ascending, blocks sorted by their smallest element, so equality is
/// structural. Text form is 1-based: "1|23|45", or "1,2|10,11" when any mode
/// index exceeds 9. Comma-free text that is not valid digit by digit is read
/// as whole numbers, so "1|2|...|10|11" round-trips.
class Partition {
 public:
  /// Throws std::invalid_argument if the blocks are empty, overlap, or do
  /// not cover 0..N-1.
  explicit Partition(std::vector<std::vector<int>> blocks);

  static Partition parse(std::string_view text);
  /// {1}|{2}|...|{N}
  static Partition finest(int n_modes);
  /// A single block holding every mode.
  static Partition whole(int n_modes);

  int n_modes() const { return n_modes_; }
  const std::vector<std::vector<int>>& blocks() const { return blocks_; }
  std::string to_string() const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<std::vector<int>> blocks_;
  int n_modes_ = 0;
};

/// a ⪯ b: `a` is at least as fine as `b`, i.e. every block of `a` lies inside
/// a single block of `b`. Throws std::invalid_argument when mode counts differ.
bool refines(const Partition& a, const Partition& b);

/// Every partition of n modes (Bell-number many), canonical and ordered.
std::vector<Partition> all_partitions(int n_modes);

}  // namespace mgeof
