#pragma once

namespace diiv {

// Standard normal CDF. Accurate to ~1 ulp over the whole real line
// (delegates to erfc in the scaled tail-stable form).
double normal_cdf(double x);

// Standard normal quantile (inverse CDF) for p in (0,1), via Wichura's
// AS241 PPND16 rational approximations; relative error below 1e-15 on
// the full open interval. Throws std::domain_error outside (0,1).
double normal_quantile(double p);

}  // namespace diiv
