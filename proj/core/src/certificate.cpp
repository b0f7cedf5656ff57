#include "cinv/certificate.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace cinv {

namespace {

void check_args(int h, int K, double beta) {
  if (K < 1 || h < 0 || h > K) {
    throw Error(ErrorCode::InvalidArguments,
                "need 0 <= h <= K and K >= 1 (h=" + std::to_string(h) +
                    ", K=" + std::to_string(K) + ")");
  }
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::InvalidArguments, "beta must lie in (0, 1)");
  }
}

double log_binomial(int K, int h) {
  return std::lgamma(K + 1.0) - std::lgamma(h + 1.0) - std::lgamma(K - h + 1.0);
}

}  // namespace

double epsilon_even_split(int h, int K, double beta) {
  check_args(h, K, beta);
  if (h == K) return 1.0;
  // (1 - eps)^(K-h) = beta / (K binom(K,h))
  const double log_rhs = std::log(beta) - std::log(static_cast<double>(K)) -
                         log_binomial(K, h);
  return -std::expm1(log_rhs / (K - h));
}

std::vector<double> epsilon_table(int K, double beta) {
  std::vector<double> table(K + 1);
  for (int h = 0; h <= K; ++h) table[h] = epsilon_even_split(h, K, beta);
  return table;
}

double log_summation_term(int h, int K, double beta) {
  check_args(h, K, beta);
  if (h == K) {
    throw Error(ErrorCode::InvalidArguments, "the sum runs over h < K");
  }
  const double eps = epsilon_even_split(h, K, beta);
  return log_binomial(K, h) + (K - h) * std::log1p(-eps);
}

std::string hex_fingerprint(std::uint64_t fp) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fp));
  return buf;
}

Certificate build_certificate(int K, int support_size, double beta,
                              const AffinePolicy& policy,
                              const ScenarioSet& scenarios) {
  if (K != scenarios.size()) {
    throw Error(ErrorCode::MismatchedFingerprints,
                "K differs from the scenario count");
  }
  const std::uint64_t scenario_fp = fingerprint(scenarios);
  if (policy.scenario_fingerprint != scenario_fp) {
    throw Error(ErrorCode::MismatchedFingerprints,
                "policy was not computed on this scenario set");
  }
  Certificate c;
  c.K = K;
  c.support_size = support_size;
  c.beta = beta;
  c.epsilon = epsilon_even_split(support_size, K, beta);
  c.invariance_probability = 1.0 - c.epsilon;
  c.policy_fingerprint = fingerprint(policy);
  c.scenario_fingerprint = scenario_fp;
  c.vacuous = support_size == K;

  std::ostringstream s;
  s.precision(6);
  if (c.vacuous) {
    s << "Vacuous certificate: every one of the " << K
      << " samples is a support sample, so no violation bound below 1 follows.";
  } else {
    s << "With confidence at least 1 - " << beta
      << ", the state set is controlled invariant for an unseen parameter "
         "realization with probability at least "
      << c.invariance_probability << " (epsilon = " << c.epsilon << ", "
      << support_size << " support samples out of " << K
      << "); the vertex control law built from the affine vertex inputs "
         "keeps the set invariant with the same guarantee.";
  }
  c.statement = s.str();
  return c;
}

}  // namespace cinv
