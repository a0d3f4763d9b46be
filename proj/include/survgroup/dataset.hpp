#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace survgroup {

// Time-to-event dataset: n subjects with p real covariates and an outcome pair
// (time, event indicator). Features are stored column-major so per-feature
// scans (tree splits, soft conditions) touch contiguous memory. Immutable
// after construction; safe to share read-only across threads.
class SurvivalDataset {
 public:
  // columns[j] is feature j (all length n). Validates every invariant:
  // n >= 1, p >= 1, equal lengths, finite features, times >= 0, events in
  // {0,1}, and at least one observed event.
  SurvivalDataset(std::vector<std::vector<double>> columns, std::vector<double> times,
                  std::vector<std::uint8_t> events, std::vector<std::string> feature_names);

  std::size_t n() const { return n_; }
  std::size_t p() const { return p_; }

  double x(std::size_t i, std::size_t j) const { return features_[j * n_ + i]; }
  std::span<const double> column(std::size_t j) const {
    return {features_.data() + j * n_, n_};
  }

  const std::vector<double>& times() const { return times_; }
  const std::vector<std::uint8_t>& events() const { return events_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }
  const std::vector<std::pair<double, double>>& feature_ranges() const { return feature_ranges_; }

  // FNV-1a over all content; cache key component for fitted forests.
  std::uint64_t content_hash() const { return content_hash_; }

  // Same covariates, permuted outcomes: subject i of the result carries the
  // outcome of subject permutation[i]. Used by the permutation-test validator.
  SurvivalDataset with_permuted_outcomes(std::span<const std::size_t> permutation) const;

 private:
  SurvivalDataset() = default;

  std::size_t n_ = 0, p_ = 0;
  std::vector<double> features_;  // column-major [j * n + i]
  std::vector<double> times_;
  std::vector<std::uint8_t> events_;
  std::vector<std::string> feature_names_;
  std::vector<std::pair<double, double>> feature_ranges_;
  std::uint64_t content_hash_ = 0;
};

// UTF-8 comma-separated file with a mandatory header row and '.' decimals.
// The event column accepts {0, 1, true, false} case-insensitively. With
// one_hot, non-numeric columns expand to 0/1 indicator columns named
// "col=value" (distinct values sorted); without it they are a parse error.
// Rows keep file order.
SurvivalDataset load_csv(const std::filesystem::path& path, const std::string& time_col,
                         const std::string& event_col, bool one_hot = false);

// uniq({t_i | event_i = 1}), strictly ascending; length >= 1 by the dataset
// invariant that at least one event was observed.
std::vector<double> unique_event_times(const SurvivalDataset& data);

}  // namespace survgroup
