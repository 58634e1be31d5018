#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "flround/config.hpp"
#include "flround/errors.hpp"
#include "flround/kernels.hpp"
#include "flround/lp.hpp"

namespace flround {

std::size_t LpProblem::add_var(std::string name, double cost) {
  objective.push_back(cost);
  var_names.push_back(std::move(name));
  return objective.size() - 1;
}

std::size_t LpProblem::add_row(LpRow row) {
  rows.push_back(std::move(row));
  return rows.size() - 1;
}

void LpProblem::validate() const {
  if (var_names.size() != objective.size()) throw InvalidInput("LP: one name per variable required");
  for (double c : objective) {
    if (!std::isfinite(c)) throw InvalidInput("LP: objective coefficient is not finite");
  }
  for (const LpRow& r : rows) {
    if (!std::isfinite(r.rhs)) throw InvalidInput("LP: right-hand side is not finite");
    for (const auto& [v, a] : r.coef) {
      if (v >= num_vars()) throw InvalidInput("LP: row '" + r.name + "' references an unknown variable");
      if (!std::isfinite(a)) throw InvalidInput("LP: coefficient is not finite");
    }
  }
}

namespace {

struct SparseColumn {
  std::vector<std::uint32_t> row;
  std::vector<double> val;
};

class RevisedSimplex {
 public:
  explicit RevisedSimplex(const LpProblem& p) : p_(p) { setup(); }

  LpSolution run() {
    LpSolution out;
    reinvert();
    if (num_art_ > 0) {
      std::vector<double> phase1(cols_.size(), 0.0);
      for (std::size_t c = 0; c < cols_.size(); ++c) {
        if (is_art_[c]) phase1[c] = 1.0;
      }
      const LpStatus s = iterate(phase1, /*allow_art=*/true);
      if (s != LpStatus::kOptimal) throw NumericalError("LP: phase one cannot be unbounded");
      double infeas = 0.0;
      for (std::size_t r = 0; r < m_; ++r) {
        if (is_art_[basis_[r]]) infeas += xb_[r];
      }
      if (infeas > kTol.feasibility * (1.0 + max_rhs_)) {
        out.status = LpStatus::kInfeasible;
        out.iterations = iterations_;
        out.certificate.resize(m_);
        for (std::size_t r = 0; r < m_; ++r) out.certificate[r] = pi_[r] * row_sign_[r];
        return out;
      }
      drive_out_artificials();
    }
    const LpStatus s = iterate(cost_, /*allow_art=*/false);
    out.iterations = iterations_;
    if (s == LpStatus::kUnbounded) {
      out.status = LpStatus::kUnbounded;
      out.certificate = ray_;
      return out;
    }
    reinvert();
    extract(out);
    check(out);
    return out;
  }

 private:
  void setup() {
    p_.validate();
    n_ = p_.num_vars();
    m_ = p_.rows.size();
    std::vector<SparseColumn> structural(n_);
    row_sign_.assign(m_, 1.0);
    b_.assign(m_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const LpRow& row = p_.rows[r];
      row_sign_[r] = row.rhs < 0.0 ? -1.0 : 1.0;
      b_[r] = row.rhs * row_sign_[r];
      max_rhs_ = std::max(max_rhs_, b_[r]);
      for (const auto& [v, a] : row.coef) {
        if (a == 0.0) continue;
        structural[v].row.push_back(static_cast<std::uint32_t>(r));
        structural[v].val.push_back(a * row_sign_[r]);
      }
    }
    cols_ = std::move(structural);
    cost_.assign(p_.objective.begin(), p_.objective.end());
    is_art_.assign(n_, 0);
    basis_.assign(m_, 0);
    for (std::size_t r = 0; r < m_; ++r) {
      Sense s = p_.rows[r].sense;
      if (row_sign_[r] < 0.0 && s != Sense::kEq) s = (s == Sense::kLe) ? Sense::kGe : Sense::kLe;
      if (s != Sense::kEq) {
        SparseColumn slack;
        slack.row.push_back(static_cast<std::uint32_t>(r));
        slack.val.push_back(s == Sense::kLe ? 1.0 : -1.0);
        cols_.push_back(std::move(slack));
        cost_.push_back(0.0);
        is_art_.push_back(0);
        if (s == Sense::kLe) {
          basis_[r] = cols_.size() - 1;
          continue;
        }
      }
      SparseColumn art;
      art.row.push_back(static_cast<std::uint32_t>(r));
      art.val.push_back(1.0);
      cols_.push_back(std::move(art));
      cost_.push_back(0.0);
      is_art_.push_back(1);
      basis_[r] = cols_.size() - 1;
      ++num_art_;
    }
    pos_.assign(cols_.size(), -1);
    for (std::size_t r = 0; r < m_; ++r) pos_[basis_[r]] = static_cast<long>(r);
    binv_.assign(m_ * m_, 0.0);
    xb_.assign(m_, 0.0);
    pi_.assign(m_, 0.0);
    cb_.assign(m_, 0.0);
    u_.assign(m_, 0.0);
    max_iterations_ = 100 * static_cast<std::int64_t>(m_ + cols_.size()) + 10000;
    refactor_period_ = std::max<std::size_t>(100, m_);
  }

  double* binv_col(std::size_t k) { return binv_.data() + k * m_; }

  // Gauss-Jordan inverse of the basis matrix with partial pivoting.
  void reinvert() {
    std::vector<double> b(m_ * m_, 0.0);  // row-major [r][k], column k = basis_[k]
    for (std::size_t k = 0; k < m_; ++k) {
      const SparseColumn& col = cols_[basis_[k]];
      for (std::size_t e = 0; e < col.row.size(); ++e) b[col.row[e] * m_ + k] = col.val[e];
    }
    std::vector<double> inv(m_ * m_, 0.0);  // row-major
    for (std::size_t r = 0; r < m_; ++r) inv[r * m_ + r] = 1.0;
    std::vector<std::size_t> perm(m_);
    for (std::size_t c = 0; c < m_; ++c) {
      std::size_t best = c;
      double best_abs = std::abs(b[c * m_ + c]);
      for (std::size_t r = c + 1; r < m_; ++r) {
        const double a = std::abs(b[r * m_ + c]);
        if (a > best_abs) {
          best_abs = a;
          best = r;
        }
      }
      if (best_abs < 1e-12) throw NumericalError("LP: basis matrix became singular");
      if (best != c) {
        std::swap_ranges(b.begin() + c * m_, b.begin() + (c + 1) * m_, b.begin() + best * m_);
        std::swap_ranges(inv.begin() + c * m_, inv.begin() + (c + 1) * m_, inv.begin() + best * m_);
      }
      const double piv = b[c * m_ + c];
      for (std::size_t k = 0; k < m_; ++k) {
        b[c * m_ + k] /= piv;
        inv[c * m_ + k] /= piv;
      }
      for (std::size_t r = 0; r < m_; ++r) {
        if (r == c) continue;
        const double f = b[r * m_ + c];
        if (f == 0.0) continue;
        kernels::axpy(-f, {b.data() + c * m_, m_}, {b.data() + r * m_, m_});
        kernels::axpy(-f, {inv.data() + c * m_, m_}, {inv.data() + r * m_, m_});
      }
    }
    // inv is B^-1 row-major with rows indexed by basis position; store it
    // column-major.
    for (std::size_t r = 0; r < m_; ++r) {
      for (std::size_t k = 0; k < m_; ++k) binv_[k * m_ + r] = inv[r * m_ + k];
    }
    std::fill(xb_.begin(), xb_.end(), 0.0);
    for (std::size_t k = 0; k < m_; ++k) {
      if (b_[k] != 0.0) kernels::axpy(b_[k], {binv_col(k), m_}, xb_);
    }
    for (double& v : xb_) {
      if (v < 0.0 && v > -kTol.feasibility) v = 0.0;
    }
    since_refactor_ = 0;
  }

  void compute_pi(const std::vector<double>& cost) {
    for (std::size_t r = 0; r < m_; ++r) cb_[r] = cost[basis_[r]];
    for (std::size_t k = 0; k < m_; ++k) pi_[k] = kernels::dot(cb_, {binv_col(k), m_});
  }

  double reduced_cost(const std::vector<double>& cost, std::size_t c) const {
    const SparseColumn& col = cols_[c];
    double d = cost[c];
    for (std::size_t e = 0; e < col.row.size(); ++e) d -= pi_[col.row[e]] * col.val[e];
    return d;
  }

  void ftran(std::size_t c) {
    std::fill(u_.begin(), u_.end(), 0.0);
    const SparseColumn& col = cols_[c];
    for (std::size_t e = 0; e < col.row.size(); ++e) kernels::axpy(col.val[e], {binv_col(col.row[e]), m_}, u_);
  }

  void pivot(std::size_t q, std::size_t r, double theta, double dq) {
    const double ur = u_[r];
    for (std::size_t k = 0; k < m_; ++k) {
      double* col = binv_col(k);
      const double val = col[r] / ur;
      if (val != 0.0) {
        kernels::axpy(-val, u_, {col, m_});
        col[r] = val;
      }
    }
    if (theta != 0.0) kernels::axpy(-theta, u_, xb_);
    xb_[r] = theta;
    for (double& v : xb_) {
      if (v < 0.0 && v > -kTol.feasibility) v = 0.0;
    }
    for (std::size_t k = 0; k < m_; ++k) pi_[k] += dq * binv_col(k)[r];
    pos_[basis_[r]] = -1;
    basis_[r] = q;
    pos_[q] = static_cast<long>(r);
    ++iterations_;
    ++since_refactor_;
  }

  LpStatus iterate(const std::vector<double>& cost, bool allow_art) {
    compute_pi(cost);
    bool bland = false;
    int stall = 0;
    for (;;) {
      if (iterations_ > max_iterations_) throw NumericalError("LP: iteration guard exceeded (cycling or numerical trouble)");
      if (since_refactor_ >= refactor_period_) {
        reinvert();
        compute_pi(cost);
      }
      std::size_t q = cols_.size();
      double dq = -kTol.reduced_cost;
      for (std::size_t c = 0; c < cols_.size(); ++c) {
        if (pos_[c] >= 0 || (!allow_art && is_art_[c])) continue;
        const double d = reduced_cost(cost, c);
        if (d < dq) {
          q = c;
          dq = d;
          if (bland) break;
        }
      }
      if (q == cols_.size()) return LpStatus::kOptimal;
      ftran(q);
      std::size_t r = m_;
      double best_theta = std::numeric_limits<double>::infinity();
      double best_u = 0.0;
      for (std::size_t i = 0; i < m_; ++i) {
        double theta;
        double ui = u_[i];
        if (!allow_art && is_art_[basis_[i]] && std::abs(ui) > kTol.pivot) {
          theta = 0.0;  // a zero-level artificial must leave, never grow
          ui = std::abs(ui);
        } else if (ui > kTol.pivot) {
          theta = xb_[i] / ui;
        } else {
          continue;
        }
        bool take = false;
        if (r == m_ || theta < best_theta - 1e-12) {
          take = true;
        } else if (theta <= best_theta + 1e-12) {
          take = bland ? basis_[i] < basis_[r] : (ui > best_u || (ui == best_u && basis_[i] < basis_[r]));
        }
        if (take) {
          r = i;
          best_theta = theta;
          best_u = ui;
        }
      }
      if (r == m_) {
        ray_.assign(n_, 0.0);
        if (q < n_) ray_[q] = 1.0;
        for (std::size_t i = 0; i < m_; ++i) {
          if (basis_[i] < n_) ray_[basis_[i]] = -u_[i];
        }
        return LpStatus::kUnbounded;
      }
      const double theta = std::max(0.0, best_theta);
      if (theta <= 1e-12) {
        if (++stall >= kLimits.bland_stall_pivots) bland = true;
      } else {
        stall = 0;
        bland = false;
      }
      pivot(q, r, theta, dq);
    }
  }

  void drive_out_artificials() {
    for (std::size_t r = 0; r < m_; ++r) {
      if (!is_art_[basis_[r]]) continue;
      std::size_t best = cols_.size();
      double best_abs = 1e-7;
      for (std::size_t c = 0; c < cols_.size(); ++c) {
        if (pos_[c] >= 0 || is_art_[c]) continue;
        const SparseColumn& col = cols_[c];
        double alpha = 0.0;
        for (std::size_t e = 0; e < col.row.size(); ++e) alpha += binv_col(col.row[e])[r] * col.val[e];
        if (std::abs(alpha) > best_abs) {
          best_abs = std::abs(alpha);
          best = c;
        }
      }
      if (best == cols_.size()) continue;  // redundant row
      ftran(best);
      pivot(best, r, xb_[r] / u_[r], 0.0);
    }
    reinvert();
  }

  void extract(LpSolution& out) {
    compute_pi(cost_);
    out.status = LpStatus::kOptimal;
    out.primal.assign(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      if (basis_[r] < n_) out.primal[basis_[r]] = std::max(0.0, xb_[r]);
    }
    out.dual.resize(m_);
    for (std::size_t r = 0; r < m_; ++r) out.dual[r] = pi_[r] * row_sign_[r];
    out.objective = 0.0;
    for (std::size_t j = 0; j < n_; ++j) out.objective += p_.objective[j] * out.primal[j];
  }

  void check(LpSolution& out) const {
    LpResiduals& res = out.residuals;
    double dual_obj = 0.0;
    std::vector<double> aty(n_, 0.0);
    for (std::size_t r = 0; r < m_; ++r) {
      const LpRow& row = p_.rows[r];
      double lhs = 0.0;
      for (const auto& [v, a] : row.coef) {
        lhs += a * out.primal[v];
        aty[v] += a * out.dual[r];
      }
      const double slack = lhs - row.rhs;
      const double y = out.dual[r];
      double viol = 0.0, sign_viol = 0.0;
      switch (row.sense) {
        case Sense::kLe:
          viol = std::max(0.0, slack);
          sign_viol = std::max(0.0, y);
          break;
        case Sense::kGe:
          viol = std::max(0.0, -slack);
          sign_viol = std::max(0.0, -y);
          break;
        case Sense::kEq:
          viol = std::abs(slack);
          break;
      }
      res.primal = std::max(res.primal, viol);
      res.dual = std::max(res.dual, sign_viol);
      if (row.sense != Sense::kEq) res.comp_slack = std::max(res.comp_slack, std::abs(y * slack));
      dual_obj += y * row.rhs;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      const double d = p_.objective[j] - aty[j];
      res.dual = std::max(res.dual, std::max(0.0, -d));
      res.comp_slack = std::max(res.comp_slack, std::abs(out.primal[j] * d));
    }
    res.gap = std::abs(out.objective - dual_obj);
    const bool ok = res.primal <= kTol.reported && res.dual <= kTol.reported &&
                    res.gap <= kTol.duality_gap * (1.0 + std::abs(out.objective)) &&
                    res.comp_slack <= kTol.comp_slack;
    if (!ok) {
      std::ostringstream msg;
      msg << "LP: optimal basis fails its residual checks (primal " << res.primal << ", dual " << res.dual
          << ", gap " << res.gap << ", complementary slackness " << res.comp_slack << ")";
      throw NumericalError(msg.str());
    }
  }

  const LpProblem& p_;
  std::size_t n_ = 0, m_ = 0;
  std::vector<SparseColumn> cols_;
  std::vector<double> cost_;
  std::vector<char> is_art_;
  std::size_t num_art_ = 0;
  std::vector<double> b_, row_sign_;
  double max_rhs_ = 0.0;
  std::vector<std::size_t> basis_;
  std::vector<long> pos_;
  std::vector<double> binv_, xb_, pi_, cb_, u_, ray_;
  std::int64_t iterations_ = 0, max_iterations_ = 0;
  std::size_t since_refactor_ = 0, refactor_period_ = 100;
};

}  // namespace

LpSolution solve_lp(const LpProblem& p) {
  if (p.rows.empty()) {
    LpSolution out;
    p.validate();
    for (double c : p.objective) {
      if (c < 0.0) {
        out.status = LpStatus::kUnbounded;
        out.certificate.assign(p.num_vars(), 0.0);
        for (std::size_t j = 0; j < p.num_vars(); ++j) out.certificate[j] = p.objective[j] < 0.0 ? 1.0 : 0.0;
        return out;
      }
    }
    out.status = LpStatus::kOptimal;
    out.primal.assign(p.num_vars(), 0.0);
    return out;
  }
  return RevisedSimplex(p).run();
}

void write_mps(const LpProblem& p, std::ostream& out, const std::string& name) {
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  auto field = [](const std::string& s, int width) {
    std::string t = s;
    if (t.size() < static_cast<std::size_t>(width)) t.append(width - t.size(), ' ');
    return t;
  };
  // Fixed-format names are at most 8 characters, so rows and columns get
  // short synthetic names.
  auto rname = [](std::size_t r) { return "R" + std::to_string(r); };
  auto cname = [](std::size_t c) { return "C" + std::to_string(c); };
  out << "NAME          " << name << "\n";
  out << "ROWS\n";
  out << " N  COST\n";
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    const char* s = p.rows[r].sense == Sense::kLe ? "L" : p.rows[r].sense == Sense::kGe ? "G" : "E";
    out << " " << s << "  " << rname(r) << "\n";
  }
  std::vector<std::vector<std::pair<std::size_t, double>>> by_col(p.num_vars());
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    for (const auto& [v, a] : p.rows[r].coef) by_col[v].push_back({r, a});
  }
  out << "COLUMNS\n";
  for (std::size_t c = 0; c < p.num_vars(); ++c) {
    if (p.objective[c] != 0.0)
      out << "    " << field(cname(c), 10) << field("COST", 10) << fmt(p.objective[c]) << "\n";
    for (const auto& [r, a] : by_col[c]) out << "    " << field(cname(c), 10) << field(rname(r), 10) << fmt(a) << "\n";
  }
  out << "RHS\n";
  for (std::size_t r = 0; r < p.rows.size(); ++r) {
    if (p.rows[r].rhs != 0.0) out << "    " << field("RHS", 10) << field(rname(r), 10) << fmt(p.rows[r].rhs) << "\n";
  }
  out << "ENDATA\n";
}

}  // namespace flround
