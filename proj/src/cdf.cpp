#include "uvrc/cdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uvrc {

int QuantizedCDF::find(uint32_t scaled) const {
  // upper_bound on cum, minus one. cum is strictly increasing (freq >= 1).
  auto it = std::upper_bound(cum.begin(), cum.end(), scaled);
  return int(it - cum.begin()) - 1;
}

QuantizedCDF build_cdf_table(std::span<const double> pmf, int min_sym, bool escape) {
  if (pmf.empty()) throw InvalidArgument("build_cdf_table: empty support");
  const int n = int(pmf.size()) + (escape ? 1 : 0);
  if (uint32_t(n) > QuantizedCDF::kTotal)
    throw InvalidArgument("build_cdf_table: support too large for 16-bit table");

  double total = std::accumulate(pmf.begin(), pmf.end(), 0.0);
  if (total > 1.0 + 1e-6) throw InvalidArgument("build_cdf_table: pmf sums to more than 1");
  for (double p : pmf)
    if (!(p >= 0.0) || !std::isfinite(p))
      throw InvalidArgument("build_cdf_table: pmf entries must be finite and non-negative");

  std::vector<int64_t> freq(n, 1);
  for (size_t i = 0; i < pmf.size(); ++i)
    freq[i] = std::max<int64_t>(1, llround(pmf[i] * QuantizedCDF::kTotal));

  // Renormalize to exactly kTotal: push the surplus/deficit onto the
  // largest entries, never dropping any slot below 1.
  int64_t diff = int64_t(QuantizedCDF::kTotal) - std::accumulate(freq.begin(), freq.end(), int64_t(0));
  if (diff > 0) {
    int best = int(std::max_element(freq.begin(), freq.end()) - freq.begin());
    freq[best] += diff;
  } else {
    while (diff < 0) {
      int best = int(std::max_element(freq.begin(), freq.end()) - freq.begin());
      int64_t take = std::min(-diff, freq[best] - 1);
      if (take == 0) throw InvalidArgument("build_cdf_table: support exceeds table precision");
      freq[best] -= take;
      diff += take;
    }
  }

  QuantizedCDF t;
  t.min_sym = min_sym;
  t.max_sym = min_sym + int(pmf.size()) - 1;
  t.has_escape = escape;
  t.cum.resize(n + 1);
  t.cum[0] = 0;
  for (int i = 0; i < n; ++i) t.cum[i + 1] = t.cum[i] + uint32_t(freq[i]);
  return t;
}

}  // namespace uvrc
