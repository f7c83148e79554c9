#include "mgeof/partitions.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <stdexcept>

namespace mgeof {

Partition::Partition(std::vector<std::vector<int>> blocks) : blocks_(std::move(blocks)) {
  if (blocks_.empty()) throw std::invalid_argument("partition has no blocks");
  std::vector<int> all;
  for (auto& b : blocks_) {
    if (b.empty()) throw std::invalid_argument("partition has an empty block");
    std::sort(b.begin(), b.end());
    all.insert(all.end(), b.begin(), b.end());
  }
  std::sort(blocks_.begin(), blocks_.end(), [](const auto& x, const auto& y) { return x.front() < y.front(); });
  std::sort(all.begin(), all.end());
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (all[i] != static_cast<int>(i)) {
      throw std::invalid_argument("partition blocks must be disjoint and cover modes 1..N");
    }
  }
  n_modes_ = static_cast<int>(all.size());
}

namespace {

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

// Every block is a comma-separated list of 1-based indices.
std::vector<std::vector<int>> parse_numbers(std::string_view text) {
  std::vector<std::vector<int>> blocks;
  for (auto token : split(text, '|')) {
    std::vector<int> block;
    for (auto num : split(token, ',')) {
      int v = 0;
      const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), v);
      if (num.empty() || ec != std::errc() || ptr != num.data() + num.size() || v < 1) {
        throw std::invalid_argument(fmt::format("bad mode index '{}' in partition '{}'", num, text));
      }
      block.push_back(v - 1);
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

// Every character of a block is one index 1..9.
std::vector<std::vector<int>> parse_digits(std::string_view text) {
  std::vector<std::vector<int>> blocks;
  for (auto token : split(text, '|')) {
    if (token.empty()) throw std::invalid_argument(fmt::format("empty block in partition '{}'", text));
    std::vector<int> block;
    for (char c : token) {
      if (c < '1' || c > '9') throw std::invalid_argument(fmt::format("bad character '{}' in partition '{}'", c, text));
      block.push_back(c - '1');
    }
    blocks.push_back(std::move(block));
  }
  return blocks;
}

}  // namespace

Partition Partition::parse(std::string_view text) {
  if (text.find(',') != std::string_view::npos) return Partition(parse_numbers(text));
  // Without commas, "10|11" style text is only readable as whole numbers.
  try {
    return Partition(parse_digits(text));
  } catch (const std::invalid_argument&) {
    try {
      return Partition(parse_numbers(text));
    } catch (const std::invalid_argument&) {
    }
    throw;
  }
}

Partition Partition::finest(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("finest partition needs at least one mode");
  std::vector<std::vector<int>> blocks;
  for (int k = 0; k < n_modes; ++k) blocks.push_back({k});
  return Partition(std::move(blocks));
}

Partition Partition::whole(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("partition needs at least one mode");
  std::vector<int> block(n_modes);
  for (int k = 0; k < n_modes; ++k) block[k] = k;
  return Partition({block});
}

std::string Partition::to_string() const {
  const bool wide = n_modes_ > 9;
  std::string out;
  for (std::size_t b = 0; b < blocks_.size(); ++b) {
    if (b) out += '|';
    for (std::size_t i = 0; i < blocks_[b].size(); ++i) {
      if (wide && i) out += ',';
      out += std::to_string(blocks_[b][i] + 1);
    }
  }
  return out;
}

bool refines(const Partition& a, const Partition& b) {
  if (a.n_modes() != b.n_modes()) throw std::invalid_argument("refines: partitions of different mode sets");
  std::vector<int> owner(b.n_modes());
  for (std::size_t i = 0; i < b.blocks().size(); ++i) {
    for (int m : b.blocks()[i]) owner[m] = static_cast<int>(i);
  }
  return std::all_of(a.blocks().begin(), a.blocks().end(), [&](const auto& block) {
    return std::all_of(block.begin(), block.end(), [&](int m) { return owner[m] == owner[block.front()]; });
  });
}

std::vector<Partition> all_partitions(int n_modes) {
  if (n_modes < 1) throw std::invalid_argument("all_partitions needs at least one mode");
  // Restricted growth strings enumerate set partitions without repeats.
  std::vector<Partition> out;
  std::vector<int> label(n_modes, 0);
  while (true) {
    const int n_blocks = *std::max_element(label.begin(), label.end()) + 1;
    std::vector<std::vector<int>> blocks(n_blocks);
    for (int m = 0; m < n_modes; ++m) blocks[label[m]].push_back(m);
    out.emplace_back(std::move(blocks));

    int i = n_modes - 1;
    for (; i > 0; --i) {
      const int prefix_max = *std::max_element(label.begin(), label.begin() + i);
      if (label[i] <= prefix_max) {
        ++label[i];
        std::fill(label.begin() + i + 1, label.end(), 0);
        break;
      }
    }
    if (i == 0) break;
  }
  return out;
}

}  // namespace mgeof
