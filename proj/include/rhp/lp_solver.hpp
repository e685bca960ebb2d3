#pragma once

#include <rhp/errors.hpp>

#include <Eigen/Core>

#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

namespace rhp::lp {

enum class Status { Optimal, Infeasible, Unbounded };

inline const char* to_string(Status status)
{
  switch (status)
  {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
  }
  return "unknown";
}

//==============================================================================
/// minimize  objective . x
/// s.t.      eq_matrix x  = eq_rhs
///           ub_matrix x <= ub_rhs
///           x >= lower_bounds        (all zero when lower_bounds is empty)
template<typename Scalar>
struct LPStandardForm
{
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  Vector objective;
  Matrix eq_matrix;
  Vector eq_rhs;
  Matrix ub_matrix;
  Vector ub_rhs;
  Vector lower_bounds;

  Eigen::Index variable_count() const { return objective.size(); }

  static LPStandardForm with_variables(Eigen::Index n)
  {
    LPStandardForm lp;
    lp.objective = Vector::Zero(n);
    lp.eq_matrix = Matrix::Zero(0, n);
    lp.eq_rhs = Vector::Zero(0);
    lp.ub_matrix = Matrix::Zero(0, n);
    lp.ub_rhs = Vector::Zero(0);
    return lp;
  }

  void validate() const
  {
    const auto n = variable_count();
    const auto check = [&](bool ok, const char* what) {
      if (!ok)
        throw DimensionMismatch(std::string("LPStandardForm: ") + what);
    };
    check(eq_matrix.rows() == 0 || eq_matrix.cols() == n, "equality matrix column count");
    check(ub_matrix.rows() == 0 || ub_matrix.cols() == n, "inequality matrix column count");
    check(eq_rhs.size() == eq_matrix.rows(), "equality rhs length");
    check(ub_rhs.size() == ub_matrix.rows(), "inequality rhs length");
    check(lower_bounds.size() == 0 || lower_bounds.size() == n, "lower bound length");
  }

  /// Worst violation of any constraint at x (0 when feasible).
  Scalar max_violation(const Vector& x) const
  {
    Scalar worst = Scalar(0);
    if (eq_matrix.rows() > 0)
      worst = std::max(worst, (eq_matrix * x - eq_rhs).cwiseAbs().maxCoeff());
    if (ub_matrix.rows() > 0)
      worst = std::max(worst, (ub_matrix * x - ub_rhs).maxCoeff());
    const Vector lb = lower_bounds.size() ? lower_bounds : Vector::Zero(x.size());
    if (x.size() > 0)
      worst = std::max(worst, (lb - x).maxCoeff());
    return worst;
  }
};

template<typename Scalar>
struct LPResult
{
  Status status = Status::Infeasible;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> solution;
  Scalar objective_value = std::numeric_limits<Scalar>::quiet_NaN();
  std::size_t pivots = 0;
};

struct SolverOptions
{
  double pivot_tolerance = 1e-9;
  double feasibility_tolerance = 1e-7;
  /// When set, the tableau is printed after setup and after every pivot.
  std::ostream* tableau_dump = nullptr;
};

using LPStandardFormd = LPStandardForm<double>;
using LPResultd = LPResult<double>;

namespace detail {

//==============================================================================
/// Dense two-phase tableau with Bland's rule. Columns are laid out as
/// [structural | slack | artificial | rhs]; the cost row is kept separately.
template<typename Scalar>
class Tableau
{
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Tableau(const LPStandardForm<Scalar>& lp, const SolverOptions& options)
  : _options(options)
  {
    _n = lp.variable_count();
    const Eigen::Index m_eq = lp.eq_matrix.rows();
    const Eigen::Index m_ub = lp.ub_matrix.rows();
    const Eigen::Index m = m_eq + m_ub;
    _slack = m_ub;

    const Vector lb = lp.lower_bounds.size() ? lp.lower_bounds : Vector::Zero(_n);
    Vector b_eq = lp.eq_rhs;
    Vector b_ub = lp.ub_rhs;
    if (m_eq)
      b_eq -= lp.eq_matrix * lb;
    if (m_ub)
      b_ub -= lp.ub_matrix * lb;

    // A row needs an artificial variable unless its own slack can start basic.
    std::vector<bool> needs_artificial(m, true);
    for (Eigen::Index i = 0; i < m_ub; ++i)
      needs_artificial[m_eq + i] = b_ub(i) < Scalar(0);
    _artificial = 0;
    for (bool a : needs_artificial)
      _artificial += a ? 1 : 0;

    _rhs = _n + _slack + _artificial;
    _tab = Matrix::Zero(m, _rhs + 1);
    _basis.assign(m, -1);

    Eigen::Index next_artificial = _n + _slack;
    for (Eigen::Index i = 0; i < m; ++i)
    {
      Scalar sign = Scalar(1);
      if (i < m_eq)
      {
        sign = b_eq(i) < Scalar(0) ? Scalar(-1) : Scalar(1);
        _tab.row(i).head(_n) = sign * lp.eq_matrix.row(i);
        _tab(i, _rhs) = sign * b_eq(i);
      }
      else
      {
        const Eigen::Index k = i - m_eq;
        sign = b_ub(k) < Scalar(0) ? Scalar(-1) : Scalar(1);
        _tab.row(i).head(_n) = sign * lp.ub_matrix.row(k);
        _tab(i, _n + k) = sign;
        _tab(i, _rhs) = sign * b_ub(k);
        if (!needs_artificial[i])
          _basis[i] = _n + k;
      }
      if (needs_artificial[i])
      {
        _tab(i, next_artificial) = Scalar(1);
        _basis[i] = next_artificial++;
      }
    }
    _lower = lb;
  }

  LPResult<Scalar> run(const LPStandardForm<Scalar>& lp)
  {
    LPResult<Scalar> result;

    // Phase one: minimize the sum of artificials.
    _cost = RowVector::Zero(_rhs + 1);
    for (Eigen::Index i = 0; i < rows(); ++i)
    {
      if (is_artificial(_basis[i]))
        _cost -= _tab.row(i);
    }
    for (Eigen::Index j = _n + _slack; j < _rhs; ++j)
      _cost(j) = Scalar(0);
    dump("phase 1 start");

    if (_artificial > 0)
    {
      iterate(_rhs);
      if (-_cost(_rhs) > Scalar(_options.feasibility_tolerance))
      {
        result.status = Status::Infeasible;
        result.pivots = _pivots;
        return result;
      }
      drive_out_artificials();
    }

    // Phase two on the original objective; artificials may no longer enter.
    _cost = RowVector::Zero(_rhs + 1);
    _cost.head(_n) = lp.objective.transpose();
    for (Eigen::Index i = 0; i < rows(); ++i)
    {
      const Eigen::Index b = _basis[i];
      if (b < _n && _cost(b) != Scalar(0))
        _cost -= _cost(b) * _tab.row(i);
    }
    dump("phase 2 start");

    if (!iterate(_n + _slack))
    {
      result.status = Status::Unbounded;
      result.pivots = _pivots;
      return result;
    }

    Vector x = Vector::Zero(_n);
    for (Eigen::Index i = 0; i < rows(); ++i)
    {
      if (_basis[i] < _n)
        x(_basis[i]) = _tab(i, _rhs);
    }
    x += _lower;
    result.status = Status::Optimal;
    result.solution = std::move(x);
    result.objective_value = lp.objective.dot(result.solution);
    result.pivots = _pivots;
    return result;
  }

private:
  Eigen::Index rows() const { return _tab.rows(); }
  bool is_artificial(Eigen::Index col) const { return col >= _n + _slack && col < _rhs; }

  /// Runs simplex pivots over columns [0, allowed). Returns false when the
  /// entering column is unbounded.
  bool iterate(Eigen::Index allowed)
  {
    const Scalar ptol = Scalar(_options.pivot_tolerance);
    const std::size_t limit = 1000 + 50 * static_cast<std::size_t>(rows() + _rhs);
    while (true)
    {
      // Bland: lowest-index improving column.
      Eigen::Index enter = -1;
      for (Eigen::Index j = 0; j < allowed; ++j)
      {
        if (_cost(j) < -ptol)
        {
          enter = j;
          break;
        }
      }
      if (enter < 0)
        return true;

      // Bland: minimum ratio, ties broken by the lowest basic index.
      Eigen::Index leave = -1;
      Scalar best = Scalar(0);
      for (Eigen::Index i = 0; i < rows(); ++i)
      {
        const Scalar a = _tab(i, enter);
        if (a <= ptol)
          continue;
        const Scalar ratio = _tab(i, _rhs) / a;
        if (leave < 0 || ratio < best - ptol)
        {
          best = ratio;
          leave = i;
        }
        else if (ratio <= best + ptol && _basis[i] < _basis[leave])
        {
          leave = i;
        }
      }
      if (leave < 0)
        return false;

      pivot(leave, enter);
      if (_pivots > limit)
        throw std::runtime_error("simplex: pivot limit exceeded");
    }
  }

  void pivot(Eigen::Index row, Eigen::Index col)
  {
    _tab.row(row) /= _tab(row, col);
    const RowVector pivot_row = _tab.row(row);
    for (Eigen::Index i = 0; i < rows(); ++i)
    {
      if (i == row)
        continue;
      const Scalar f = _tab(i, col);
      if (f != Scalar(0))
      {
        _tab.row(i) -= f * pivot_row;
        _tab(i, col) = Scalar(0);
      }
    }
    const Scalar f = _cost(col);
    if (f != Scalar(0))
    {
      _cost -= f * pivot_row;
      _cost(col) = Scalar(0);
    }
    _basis[row] = col;
    ++_pivots;
    dump("pivot");
  }

  void drive_out_artificials()
  {
    const Scalar ptol = Scalar(_options.pivot_tolerance);
    std::vector<Eigen::Index> redundant;
    for (Eigen::Index i = 0; i < rows(); ++i)
    {
      if (!is_artificial(_basis[i]))
        continue;
      Eigen::Index col = -1;
      for (Eigen::Index j = 0; j < _n + _slack; ++j)
      {
        if (std::abs(_tab(i, j)) > ptol)
        {
          col = j;
          break;
        }
      }
      if (col >= 0)
        pivot(i, col);
      else
        redundant.push_back(i);
    }
    if (redundant.empty())
      return;

    // Linearly dependent equality rows carry no information.
    Matrix kept(rows() - static_cast<Eigen::Index>(redundant.size()), _tab.cols());
    std::vector<Eigen::Index> basis;
    Eigen::Index r = 0;
    std::size_t next = 0;
    for (Eigen::Index i = 0; i < rows(); ++i)
    {
      if (next < redundant.size() && redundant[next] == i)
      {
        ++next;
        continue;
      }
      kept.row(r++) = _tab.row(i);
      basis.push_back(_basis[i]);
    }
    _tab = std::move(kept);
    _basis = std::move(basis);
  }

  void dump(const char* label) const
  {
    if (!_options.tableau_dump)
      return;
    auto& os = *_options.tableau_dump;
    os << "-- " << label << " (pivots=" << _pivots << ")\n";
    for (Eigen::Index i = 0; i < rows(); ++i)
      os << "x" << _basis[i] << " | " << _tab.row(i) << "\n";
    os << "cost | " << _cost << "\n";
  }

  SolverOptions _options;
  Eigen::Index _n = 0;
  Eigen::Index _slack = 0;
  Eigen::Index _artificial = 0;
  Eigen::Index _rhs = 0;
  Matrix _tab;
  RowVector _cost;
  std::vector<Eigen::Index> _basis;
  Vector _lower;
  std::size_t _pivots = 0;
};

} // namespace detail

//==============================================================================
/// Two-phase primal simplex. Throws DimensionMismatch on malformed input.
template<typename Scalar>
LPResult<Scalar> solve(const LPStandardForm<Scalar>& problem, const SolverOptions& options = {})
{
  problem.validate();
  detail::Tableau<Scalar> tableau(problem, options);
  return tableau.run(problem);
}

} // namespace rhp::lp
