#include "epitext/drug_match.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>

#include "epitext/error.hpp"
#include "epitext/textproc.hpp"
#include "epitext/utf8.hpp"

namespace epitext::drugs {

namespace {

std::size_t lcs_length(const std::vector<char32_t>& a, const std::vector<char32_t>& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0);
  std::vector<std::size_t> cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::set<std::string> word_set(std::string_view s) {
  std::set<std::string> words;
  std::string current;
  std::size_t i = 0;
  while (i < s.size()) {
    const std::size_t start = i;
    const char32_t cp = utf8::decode_next(s, i);
    if (utf8::is_space(cp)) {
      if (!current.empty()) words.insert(std::move(current)), current.clear();
    } else {
      current.append(s.substr(start, i - start));
    }
  }
  if (!current.empty()) words.insert(std::move(current));
  return words;
}

std::string join(const std::vector<std::string>& words) {
  std::string out;
  for (const auto& w : words) {
    if (!out.empty()) out += ' ';
    out += w;
  }
  return out;
}

}  // namespace

int indel_ratio(std::string_view a, std::string_view b) {
  const auto ca = utf8::decode(a);
  const auto cb = utf8::decode(b);
  const long long lensum = static_cast<long long>(ca.size() + cb.size());
  if (lensum == 0) return 100;
  const long long kept = 2 * static_cast<long long>(lcs_length(ca, cb));
  // round_half_up(100 * kept / lensum)
  return static_cast<int>((200 * kept + lensum) / (2 * lensum));
}

int token_set_ratio(std::string_view a, std::string_view b) {
  const auto sa = word_set(a);
  const auto sb = word_set(b);
  std::vector<std::string> inter, only_a, only_b;
  std::set_intersection(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(inter));
  std::set_difference(sa.begin(), sa.end(), sb.begin(), sb.end(), std::back_inserter(only_a));
  std::set_difference(sb.begin(), sb.end(), sa.begin(), sa.end(), std::back_inserter(only_b));

  const std::string t0 = join(inter);
  auto with_diff = [&](const std::vector<std::string>& diff) {
    if (diff.empty()) return t0;
    if (t0.empty()) return join(diff);
    return t0 + ' ' + join(diff);
  };
  const std::string t1 = with_diff(only_a);
  const std::string t2 = with_diff(only_b);
  return std::max({indel_ratio(t0, t1), indel_ratio(t0, t2), indel_ratio(t1, t2)});
}

void DrugRegistry::add(const std::string& name) {
  std::string normalized;
  for (const auto& token : textproc::tokenize(name)) {
    if (!normalized.empty()) normalized += ' ';
    normalized += token.normalized;
  }
  if (normalized.empty()) throw Error("drug name is empty after normalization: '" + name + "'");
  for (const auto& e : entries_) {
    if (e.normalized == normalized) {
      throw Error("drug names '" + e.canonical + "' and '" + name + "' collide after normalization");
    }
  }
  entries_.push_back({name, std::move(normalized)});
}

DrugRegistry DrugRegistry::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open drug registry: " + path.string());
  DrugRegistry registry;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    auto last = line.find_last_not_of(" \t");
    try {
      registry.add(line.substr(first, last - first + 1));
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return registry;
}

DrugRegistry DrugRegistry::from_names(std::span<const std::string> names) {
  DrugRegistry registry;
  for (const auto& name : names) registry.add(name);
  return registry;
}

std::vector<DrugMatch> extract_drugs(const corpus::EpicrisisRecord& record, const DrugRegistry& registry,
                                     const DrugMatcherOptions& options) {
  if (registry.empty()) throw Error("drug registry is empty");
  if (options.threshold <= 0 || options.threshold > 100) {
    throw Error("drug match threshold must be in (0, 100]");
  }
  const std::size_t max_window =
      static_cast<std::size_t>(std::clamp(options.max_window, 1, 3));

  const auto tokens = textproc::tokenize(record.text);
  std::vector<std::string> norms;
  norms.reserve(tokens.size());
  for (const auto& t : tokens) {
    norms.push_back(options.fold_ascii ? utf8::fold_ascii(t.normalized) : t.normalized);
  }
  std::vector<std::string> entry_norms;
  entry_norms.reserve(registry.size());
  for (const auto& e : registry.entries()) {
    entry_norms.push_back(options.fold_ascii ? utf8::fold_ascii(e.normalized) : e.normalized);
  }

  std::map<std::string, DrugMatch> best;  // canonical -> best match
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    for (std::size_t w = 1; w <= max_window && i + w <= tokens.size(); ++w) {
      std::string window = norms[i];
      std::string surface = tokens[i].surface;
      for (std::size_t k = 1; k < w; ++k) {
        window += ' ';
        window += norms[i + k];
        surface += ' ';
        surface += tokens[i + k].surface;
      }
      for (std::size_t e = 0; e < entry_norms.size(); ++e) {
        const int score = token_set_ratio(window, entry_norms[e]);
        if (score < options.threshold) continue;
        DrugMatch candidate{registry.entries()[e].canonical, surface, score, tokens[i].offset};
        auto [it, inserted] = best.emplace(candidate.canonical, candidate);
        if (inserted) continue;
        if (candidate.score > it->second.score ||
            (candidate.score == it->second.score && candidate.offset < it->second.offset)) {
          it->second = candidate;
        }
      }
    }
  }

  std::vector<DrugMatch> matches;
  matches.reserve(best.size());
  for (auto& [canonical, match] : best) matches.push_back(std::move(match));
  std::sort(matches.begin(), matches.end(), [](const DrugMatch& a, const DrugMatch& b) {
    if (a.offset != b.offset) return a.offset < b.offset;
    return a.canonical < b.canonical;
  });
  return matches;
}

}  // namespace epitext::drugs
