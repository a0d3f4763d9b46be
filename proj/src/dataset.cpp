#include "survgroup/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "survgroup/errors.hpp"

namespace survgroup {

namespace {

constexpr std::uint64_t kFnvOffset = 14695981039346656037ULL;
constexpr std::uint64_t kFnvPrime = 1099511628211ULL;

std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= kFnvPrime;
  }
  return h;
}

template <typename T>
std::uint64_t hash_pod_vector(const std::vector<T>& v, std::uint64_t h) {
  const std::uint64_t len = v.size();
  h = fnv1a(&len, sizeof(len), h);
  if (!v.empty()) h = fnv1a(v.data(), v.size() * sizeof(T), h);
  return h;
}

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string unquote(std::string s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(unquote(trim(field)));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  const char* begin = s.data();
  const char* end = begin + s.size();
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) return false;
  *out = value;
  return true;
}

std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace

SurvivalDataset::SurvivalDataset(std::vector<std::vector<double>> columns,
                                 std::vector<double> times, std::vector<std::uint8_t> events,
                                 std::vector<std::string> feature_names) {
  if (columns.empty()) throw ValidationError("dataset needs at least one feature column");
  if (times.empty()) throw ValidationError("dataset needs at least one subject");
  n_ = times.size();
  p_ = columns.size();
  if (events.size() != n_)
    throw ShapeError("events length " + std::to_string(events.size()) + " != n " +
                     std::to_string(n_));
  if (feature_names.size() != p_)
    throw ShapeError("feature_names length " + std::to_string(feature_names.size()) + " != p " +
                     std::to_string(p_));
  for (std::size_t j = 0; j < p_; ++j) {
    if (columns[j].size() != n_)
      throw ShapeError("feature column '" + feature_names[j] + "' length " +
                       std::to_string(columns[j].size()) + " != n " + std::to_string(n_));
  }
  bool any_event = false;
  for (std::size_t i = 0; i < n_; ++i) {
    if (!std::isfinite(times[i]) || times[i] < 0.0)
      throw ValidationError("time at row " + std::to_string(i) + " must be a finite value >= 0");
    if (events[i] > 1)
      throw ValidationError("event indicator at row " + std::to_string(i) + " must be 0 or 1");
    any_event |= events[i] == 1;
  }
  if (!any_event) throw ValidationError("dataset has zero observed events");

  features_.resize(n_ * p_);
  feature_ranges_.resize(p_);
  for (std::size_t j = 0; j < p_; ++j) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n_; ++i) {
      const double v = columns[j][i];
      if (!std::isfinite(v))
        throw ValidationError("non-finite value in feature column '" + feature_names[j] + "'");
      features_[j * n_ + i] = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    feature_ranges_[j] = {lo, hi};
  }
  times_ = std::move(times);
  events_ = std::move(events);
  feature_names_ = std::move(feature_names);

  std::uint64_t h = kFnvOffset;
  const std::uint64_t dims[2] = {n_, p_};
  h = fnv1a(dims, sizeof(dims), h);
  h = hash_pod_vector(features_, h);
  h = hash_pod_vector(times_, h);
  h = hash_pod_vector(events_, h);
  for (const auto& name : feature_names_) {
    const std::uint64_t len = name.size();
    h = fnv1a(&len, sizeof(len), h);
    h = fnv1a(name.data(), name.size(), h);
  }
  content_hash_ = h;
}

SurvivalDataset SurvivalDataset::with_permuted_outcomes(
    std::span<const std::size_t> permutation) const {
  if (permutation.size() != n_)
    throw ShapeError("permutation length " + std::to_string(permutation.size()) + " != n " +
                     std::to_string(n_));
  SurvivalDataset out = *this;
  for (std::size_t i = 0; i < n_; ++i) {
    const std::size_t src = permutation[i];
    if (src >= n_) throw ArgumentError("permutation entry out of range");
    out.times_[i] = times_[src];
    out.events_[i] = events_[src];
  }
  std::uint64_t h = out.content_hash_;
  h = hash_pod_vector(out.times_, h);
  h = hash_pod_vector(out.events_, h);
  out.content_hash_ = h;
  return out;
}

SurvivalDataset load_csv(const std::filesystem::path& path, const std::string& time_col,
                         const std::string& event_col, bool one_hot) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");

  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw ValidationError("'" + path.string() + "' is empty (header row required)");

  const std::vector<std::string> header = split_csv_line(lines[0]);
  {
    std::set<std::string> seen;
    for (const auto& name : header) {
      if (!seen.insert(name).second)
        throw ValidationError("duplicate column name '" + name + "' in header");
    }
  }
  const auto find_col = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw ColumnError("column '" + name + "' not found in '" + path.string() + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t time_idx = find_col(time_col);
  const std::size_t event_idx = find_col(event_col);
  if (time_idx == event_idx) throw ColumnError("time and event columns must differ");

  // Cells as strings first; numeric-vs-categorical is decided per column.
  std::vector<std::vector<std::string>> cells;  // [column][row]
  cells.resize(header.size());
  std::size_t n = 0;
  for (std::size_t li = 1; li < lines.size(); ++li) {
    if (trim(lines[li]).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(lines[li]);
    if (fields.size() != header.size())
      throw ParseError("line " + std::to_string(li + 1) + ": expected " +
                       std::to_string(header.size()) + " fields, got " +
                       std::to_string(fields.size()));
    for (std::size_t c = 0; c < fields.size(); ++c) cells[c].push_back(fields[c]);
    ++n;
  }
  if (n == 0) throw ValidationError("'" + path.string() + "' has a header but no data rows");

  // Row numbers in messages are 1-based file lines (header is line 1).
  const auto cell_location = [&](std::size_t row, std::size_t col) {
    return "line " + std::to_string(row + 2) + ", column '" + header[col] + "'";
  };

  std::vector<double> times(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (cells[time_idx][i].empty())
      throw ValidationError("missing value at " + cell_location(i, time_idx));
    if (!parse_double(cells[time_idx][i], &times[i]))
      throw ParseError("cannot parse '" + cells[time_idx][i] + "' as a number at " +
                       cell_location(i, time_idx));
  }

  std::vector<std::uint8_t> events(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (cells[event_idx][i].empty())
      throw ValidationError("missing value at " + cell_location(i, event_idx));
    const std::string v = lowercase(cells[event_idx][i]);
    if (v == "0" || v == "false") {
      events[i] = 0;
    } else if (v == "1" || v == "true") {
      events[i] = 1;
    } else {
      throw ValidationError("event value '" + cells[event_idx][i] + "' at " +
                            cell_location(i, event_idx) +
                            " is not one of 0, 1, true, false");
    }
  }

  std::vector<std::vector<double>> columns;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == time_idx || c == event_idx) continue;

    bool numeric = true;
    std::size_t first_bad = 0;
    std::vector<double> parsed(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (cells[c][i].empty())
        throw ValidationError("missing value at " + cell_location(i, c));
      if (!parse_double(cells[c][i], &parsed[i])) {
        numeric = false;
        first_bad = i;
        break;
      }
    }

    if (numeric) {
      columns.push_back(std::move(parsed));
      names.push_back(header[c]);
      continue;
    }
    if (!one_hot)
      throw ParseError("cannot parse '" + cells[c][first_bad] + "' as a number at " +
                       cell_location(first_bad, c) +
                       " (enable one-hot encoding for categorical columns)");

    // Expand to 0/1 indicators, one per distinct value in sorted order; the
    // original value stays recoverable as the unique indicator set per row.
    std::set<std::string> distinct(cells[c].begin(), cells[c].end());
    std::map<std::string, std::size_t> slot;
    for (const auto& value : distinct) {
      slot.emplace(value, columns.size());
      columns.emplace_back(n, 0.0);
      names.push_back(header[c] + "=" + value);
    }
    for (std::size_t i = 0; i < n; ++i) columns[slot[cells[c][i]]][i] = 1.0;
  }
  if (columns.empty())
    throw ValidationError("'" + path.string() + "' has no feature columns besides '" + time_col +
                          "' and '" + event_col + "'");

  return SurvivalDataset(std::move(columns), std::move(times), std::move(events), std::move(names));
}

std::vector<double> unique_event_times(const SurvivalDataset& data) {
  std::vector<double> out;
  for (std::size_t i = 0; i < data.n(); ++i) {
    if (data.events()[i]) out.push_back(data.times()[i]);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace survgroup
