#include "cinv/lp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

#include "cinv/error.hpp"

namespace cinv {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr double kInf = std::numeric_limits<double>::infinity();
// Consecutive degenerate Dantzig pivots tolerated before switching to Bland.
constexpr int kDegenerateRunLimit = 50;

// z_j = offset + sign_pos * y[pos] (- y[neg] when the variable is free).
struct VariableMap {
  double offset = 0.0;
  int pos = -1;
  double sign_pos = 1.0;
  int neg = -1;
};

// The program rewritten as  A y <= b, y >= 0.
struct StandardForm {
  std::vector<VariableMap> vars;
  int ny = 0;
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
};

StandardForm to_standard_form(const LinearProgram& lp) {
  const int n = lp.num_variables();
  StandardForm sf;
  sf.vars.resize(n);

  std::vector<std::pair<int, double>> bound_rows;  // (y index, upper)
  for (int j = 0; j < n; ++j) {
    const double lo = lp.lower.size() ? lp.lower(j) : -kInf;
    const double up = lp.upper.size() ? lp.upper(j) : kInf;
    VariableMap& v = sf.vars[j];
    if (std::isfinite(lo)) {
      v.offset = lo;
      v.pos = sf.ny++;
      if (std::isfinite(up)) bound_rows.emplace_back(v.pos, up - lo);
    } else if (std::isfinite(up)) {
      v.offset = up;
      v.pos = sf.ny++;
      v.sign_pos = -1.0;
    } else {
      v.pos = sf.ny++;
      v.neg = sf.ny++;
    }
  }

  // T maps y to z - offset.
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, sf.ny);
  Eigen::VectorXd offset(n);
  for (int j = 0; j < n; ++j) {
    const VariableMap& v = sf.vars[j];
    offset(j) = v.offset;
    T(j, v.pos) = v.sign_pos;
    if (v.neg >= 0) T(j, v.neg) = -1.0;
  }

  const int m_in = static_cast<int>(lp.A_in.rows());
  const int m_eq = static_cast<int>(lp.A_eq.rows());
  const int m = m_in + 2 * m_eq + static_cast<int>(bound_rows.size());
  sf.A.setZero(m, sf.ny);
  sf.b.setZero(m);
  int r = 0;
  if (m_in > 0) {
    sf.A.topRows(m_in) = lp.A_in * T;
    sf.b.head(m_in) = lp.b_in - lp.A_in * offset;
    r = m_in;
  }
  if (m_eq > 0) {
    const Eigen::MatrixXd AeT = lp.A_eq * T;
    const Eigen::VectorXd be = lp.b_eq - lp.A_eq * offset;
    sf.A.middleRows(r, m_eq) = AeT;
    sf.b.segment(r, m_eq) = be;
    r += m_eq;
    sf.A.middleRows(r, m_eq) = -AeT;
    sf.b.segment(r, m_eq) = -be;
    r += m_eq;
  }
  for (const auto& [col, ub] : bound_rows) {
    sf.A(r, col) = 1.0;
    sf.b(r) = ub;
    ++r;
  }
  sf.c = T.transpose() * lp.objective;
  return sf;
}

class Tableau {
 public:
  Tableau(const StandardForm& sf, const LpOptions& opt)
      : sf_(sf), opt_(opt), m_(static_cast<int>(sf.A.rows())), ny_(sf.ny) {
    row_sign_.resize(m_);
    for (int i = 0; i < m_; ++i) {
      row_sign_[i] = sf.b(i) >= 0.0 ? 1.0 : -1.0;
      if (row_sign_[i] < 0) artificial_row_.push_back(i);
    }
    nart_ = static_cast<int>(artificial_row_.size());
    ncols_ = ny_ + m_ + nart_;
    t_.setZero(m_, ncols_ + 1);
    basis_.resize(m_);
    int a = 0;
    for (int i = 0; i < m_; ++i) {
      t_.row(i).head(ny_) = row_sign_[i] * sf.A.row(i);
      t_(i, ny_ + i) = row_sign_[i];
      t_(i, ncols_) = row_sign_[i] * sf.b(i);
      if (row_sign_[i] > 0) {
        basis_[i] = ny_ + i;
      } else {
        t_(i, ny_ + m_ + a) = 1.0;
        basis_[i] = ny_ + m_ + a;
        ++a;
      }
    }
    obj_.setZero(ncols_ + 1);
  }

  LpOutcome run() {
    LpOutcome out;
    const double scale =
        m_ > 0 ? std::max(1.0, sf_.b.cwiseAbs().maxCoeff()) : 1.0;
    if (nart_ > 0) {
      // Phase 1: minimise the sum of artificials.
      for (int i : artificial_row_) obj_ -= t_.row(i);
      for (int k = 0; k < nart_; ++k) obj_(ny_ + m_ + k) = 0.0;
      iterate(/*allow_artificial=*/true);
      if (-obj_(ncols_) > opt_.feas_tol * scale) {
        out.status = LpStatus::Infeasible;
        out.iterations = iterations_;
        return out;
      }
      drive_out_artificials();
    }

    obj_.setZero();
    obj_.head(ny_) = sf_.c;
    for (int i = 0; i < m_; ++i) {
      const int b = basis_[i];
      if (b < ny_ && sf_.c(b) != 0.0) obj_ -= sf_.c(b) * t_.row(i);
    }
    if (!iterate(/*allow_artificial=*/false)) {
      out.status = LpStatus::Unbounded;
      out.iterations = iterations_;
      return out;
    }
    out.status = LpStatus::Optimal;
    out.iterations = iterations_;
    return out;
  }

  // Values of the structural y variables at the final basis, recomputed
  // from the original data to shed accumulated pivoting error.
  Eigen::VectorXd basic_solution(bool refine) const {
    Eigen::VectorXd xb = t_.col(ncols_);
    if (refine && m_ > 0) {
      Eigen::MatrixXd B = Eigen::MatrixXd::Zero(m_, m_);
      for (int k = 0; k < m_; ++k) {
        const int col = basis_[k];
        if (col < ny_) {
          for (int i = 0; i < m_; ++i) B(i, k) = row_sign_[i] * sf_.A(i, col);
        } else if (col < ny_ + m_) {
          B(col - ny_, k) = 1.0;
        } else {
          B(artificial_row_[col - ny_ - m_], k) = 1.0;
        }
      }
      Eigen::VectorXd rhs(m_);
      for (int i = 0; i < m_; ++i) rhs(i) = row_sign_[i] * sf_.b(i);
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      if (std::abs(lu.determinant()) > 0.0) {
        Eigen::VectorXd refined = lu.solve(rhs);
        if (refined.allFinite()) xb = refined;
      }
    }
    Eigen::VectorXd y = Eigen::VectorXd::Zero(ny_);
    for (int k = 0; k < m_; ++k) {
      if (basis_[k] < ny_) y(basis_[k]) = std::max(0.0, xb(k));
    }
    return y;
  }

 private:
  // Returns false when an improving column has no bounded ratio.
  bool iterate(bool allow_artificial) {
    const int limit = allow_artificial ? ncols_ : ny_ + m_;
    bool bland = opt_.pivot_rule == PivotRule::Bland;
    int degenerate_run = 0;
    while (true) {
      if (iterations_ >= opt_.max_iterations) {
        throw Error(ErrorCode::MaxIterationsExceeded,
                    "simplex exceeded " + std::to_string(opt_.max_iterations) +
                        " pivots");
      }
      int enter = -1;
      if (bland) {
        for (int j = 0; j < limit; ++j) {
          if (obj_(j) < -opt_.feas_tol) {
            enter = j;
            break;
          }
        }
      } else {
        double best = -opt_.feas_tol;
        for (int j = 0; j < limit; ++j) {
          if (obj_(j) < best) {
            best = obj_(j);
            enter = j;
          }
        }
      }
      if (enter < 0) return true;

      int leave = -1;
      double best_ratio = kInf;
      for (int i = 0; i < m_; ++i) {
        const double a = t_(i, enter);
        if (a <= opt_.pivot_tol) continue;
        const double ratio = std::max(0.0, t_(i, ncols_)) / a;
        if (leave < 0 || ratio < best_ratio - 1e-12) {
          leave = i;
          best_ratio = ratio;
        } else if (ratio <= best_ratio + 1e-12 && basis_[i] < basis_[leave]) {
          leave = i;
        }
      }
      if (leave < 0) {
        // Every column entry is at or below the pivot threshold.
        bool tiny = false;
        for (int i = 0; i < m_; ++i) {
          if (t_(i, enter) > 0.0) tiny = true;
        }
        if (tiny && bland) {
          throw Error(ErrorCode::NumericalBreakdown,
                      "only sub-threshold pivots available in column " +
                          std::to_string(enter));
        }
        if (tiny) {
          bland = true;
          continue;
        }
        return false;
      }
      if (!bland) {
        degenerate_run = best_ratio <= 1e-12 ? degenerate_run + 1 : 0;
        if (degenerate_run > kDegenerateRunLimit) bland = true;
      }
      pivot(leave, enter);
    }
  }

  void pivot(int r, int s) {
    ++iterations_;
    t_.row(r) /= t_(r, s);
    for (int i = 0; i < m_; ++i) {
      if (i == r) continue;
      const double f = t_(i, s);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
    const double f = obj_(s);
    if (f != 0.0) obj_ -= f * t_.row(r).transpose();
    basis_[r] = s;
    if (opt_.trace) dump(r, s);
  }

  void drive_out_artificials() {
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < ny_ + m_) continue;
      for (int j = 0; j < ny_ + m_; ++j) {
        if (std::abs(t_(i, j)) > opt_.pivot_tol) {
          pivot(i, j);
          break;
        }
      }
      // A row with no eligible column is redundant; its artificial stays
      // basic at zero and never re-enters.
    }
  }

  void dump(int r, int s) const {
    std::ostream& os = *opt_.trace;
    os << "pivot " << iterations_ << ": row " << r << " col " << s << '\n';
    os << t_ << '\n' << "obj " << obj_.transpose() << '\n';
  }

  const StandardForm& sf_;
  const LpOptions& opt_;
  int m_;
  int ny_;
  int nart_ = 0;
  int ncols_ = 0;
  std::vector<double> row_sign_;
  std::vector<int> artificial_row_;
  std::vector<int> basis_;
  RowMatrix t_;
  Eigen::VectorXd obj_;
  int iterations_ = 0;
};

Eigen::VectorXd recover(const StandardForm& sf, const Eigen::VectorXd& y) {
  Eigen::VectorXd z(sf.vars.size());
  for (std::size_t j = 0; j < sf.vars.size(); ++j) {
    const VariableMap& v = sf.vars[j];
    z(j) = v.offset + v.sign_pos * y(v.pos);
    if (v.neg >= 0) z(j) -= y(v.neg);
  }
  return z;
}

double max_violation(const LinearProgram& lp, const Eigen::VectorXd& z) {
  double worst = 0.0;
  if (lp.A_in.rows() > 0) {
    worst = std::max(worst, (lp.A_in * z - lp.b_in).maxCoeff());
  }
  if (lp.A_eq.rows() > 0) {
    worst = std::max(worst, (lp.A_eq * z - lp.b_eq).cwiseAbs().maxCoeff());
  }
  for (int j = 0; j < z.size(); ++j) {
    if (lp.lower.size()) worst = std::max(worst, lp.lower(j) - z(j));
    if (lp.upper.size()) worst = std::max(worst, z(j) - lp.upper(j));
  }
  return worst;
}

}  // namespace

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "Optimal";
    case LpStatus::Infeasible: return "Infeasible";
    case LpStatus::Unbounded: return "Unbounded";
  }
  return "Unknown";
}

void LinearProgram::validate() const {
  const auto n = objective.size();
  auto fail = [](const std::string& what) {
    throw Error(ErrorCode::DimensionMismatch, what);
  };
  if (A_in.rows() != b_in.size()) fail("A_in rows differ from b_in length");
  if (A_in.rows() > 0 && A_in.cols() != n) fail("A_in column count");
  if (A_eq.rows() != b_eq.size()) fail("A_eq rows differ from b_eq length");
  if (A_eq.rows() > 0 && A_eq.cols() != n) fail("A_eq column count");
  if (lower.size() != 0 && lower.size() != n) fail("lower bound length");
  if (upper.size() != 0 && upper.size() != n) fail("upper bound length");

  const bool finite = objective.allFinite() && A_in.allFinite() &&
                      b_in.allFinite() && A_eq.allFinite() && b_eq.allFinite();
  if (!finite) {
    throw Error(ErrorCode::InvalidArguments, "non-finite LP data");
  }
  for (Eigen::Index j = 0; j < lower.size(); ++j) {
    if (std::isnan(lower(j)) || lower(j) == kInf) {
      throw Error(ErrorCode::InvalidArguments, "invalid lower bound");
    }
  }
  for (Eigen::Index j = 0; j < upper.size(); ++j) {
    if (std::isnan(upper(j)) || upper(j) == -kInf) {
      throw Error(ErrorCode::InvalidArguments, "invalid upper bound");
    }
  }
}

LpOutcome SimplexSolver::solve(const LinearProgram& lp) {
  lp.validate();
  for (Eigen::Index j = 0; j < lp.lower.size() && lp.upper.size(); ++j) {
    if (lp.lower(j) > lp.upper(j) + options_.feas_tol) {
      LpOutcome out;
      out.status = LpStatus::Infeasible;
      return out;
    }
  }

  const StandardForm sf = to_standard_form(lp);
  Tableau tableau(sf, options_);
  LpOutcome out = tableau.run();
  if (!out.optimal()) return out;

  Eigen::VectorXd z = recover(sf, tableau.basic_solution(/*refine=*/true));
  if (max_violation(lp, z) > options_.feas_tol) {
    Eigen::VectorXd raw = recover(sf, tableau.basic_solution(false));
    if (max_violation(lp, raw) > options_.feas_tol) {
      throw Error(ErrorCode::NumericalBreakdown,
                  "optimal basis violates constraints by " +
                      std::to_string(max_violation(lp, z)));
    }
    z = raw;
  }
  out.solution = std::move(z);
  out.objective = lp.objective.dot(out.solution);
  return out;
}

LpOutcome solve(const LinearProgram& lp, const LpOptions& options) {
  SimplexSolver solver(options);
  return solver.solve(lp);
}

}  // namespace cinv
