#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cinv/scenario.hpp"

namespace cinv {

/// Violation level assigned to h support samples out of K when the
/// confidence budget beta is split evenly over the K terms h = 0..K-1:
/// eps(K) = 1 and binom(K,h) (1 - eps(h))^(K-h) = beta / K otherwise.
/// Evaluated in the log domain. Throws InvalidArguments outside
/// 0 <= h <= K, 0 < beta < 1.
double epsilon_even_split(int h, int K, double beta);

/// eps(h) for h = 0..K.
std::vector<double> epsilon_table(int K, double beta);

/// log of binom(K,h) (1 - eps(h))^(K-h); each finite term equals
/// log(beta / K) up to rounding.
double log_summation_term(int h, int K, double beta);

struct Certificate {
  int K = 0;
  int support_size = 0;
  double beta = 0.0;
  double epsilon = 1.0;
  double invariance_probability = 0.0;
  std::uint64_t policy_fingerprint = 0;
  std::uint64_t scenario_fingerprint = 0;
  // s_K = K leaves nothing to certify.
  bool vacuous = true;
  std::string statement;
};

/// Packages eps(s_K). The policy must have been computed on `scenarios`
/// (checked by fingerprint; MismatchedFingerprints otherwise).
Certificate build_certificate(int K, int support_size, double beta,
                              const AffinePolicy& policy,
                              const ScenarioSet& scenarios);

std::string hex_fingerprint(std::uint64_t fp);

}  // namespace cinv
