#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epitext/corpus.hpp"

namespace epitext::drugs {

/// Similarity in [0, 100] from the insert/delete edit distance (substitution
/// cost 2, equivalently len(a)+len(b) - 2*LCS), computed over Unicode code
/// points: round_half_up(100 * (1 - dist / (len(a)+len(b)))). Two empty
/// inputs score 100.
int indel_ratio(std::string_view a, std::string_view b);

/// Compares the two inputs as duplicate-free, order-insensitive word sets:
/// with t0 = sorted intersection, t1 = t0 + sorted a-only words and
/// t2 = t0 + sorted b-only words (space-joined), returns
/// max(indel_ratio(t0,t1), indel_ratio(t0,t2), indel_ratio(t1,t2)).
int token_set_ratio(std::string_view a, std::string_view b);

/// Immutable list of canonical drug names with their normalized forms.
class DrugRegistry {
 public:
  struct Entry {
    std::string canonical;
    std::string normalized;  // lowercased, per-word edge punctuation stripped
  };

  DrugRegistry() = default;

  /// One canonical name per line; '#' starts a comment line. Names that
  /// collide after normalization are rejected.
  static DrugRegistry from_file(const std::filesystem::path& path);
  static DrugRegistry from_names(std::span<const std::string> names);

  const std::vector<Entry>& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  std::size_t size() const { return entries_.size(); }

 private:
  void add(const std::string& name);
  std::vector<Entry> entries_;
};

struct DrugMatch {
  std::string canonical;
  std::string surface;  // matched document token(s)
  int score = 0;        // >= the configured threshold
  std::size_t offset = 0;
};

struct DrugMatcherOptions {
  int threshold = 80;      // minimum token_set_ratio, inclusive; in (0, 100]
  bool fold_ascii = false; // fold diacritics on both sides before comparing
  int max_window = 1;      // document tokens per comparison window (1..3)
};

/// Compares every document token (and, when enabled, short token windows)
/// against every registry entry. Each canonical name is reported at most once,
/// keeping the highest score and then the earliest offset; results are ordered
/// by text position. An empty registry is a configuration error.
std::vector<DrugMatch> extract_drugs(const corpus::EpicrisisRecord& record, const DrugRegistry& registry,
                                     const DrugMatcherOptions& options = {});

}  // namespace epitext::drugs
