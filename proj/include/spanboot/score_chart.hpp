#pragma once

#include <Eigen/Core>

#include <cassert>

namespace spanboot
{

/// Upper-triangular table of span scores: cell (i, j) holds s(i, j) for
/// 0 <= i <= j < n. The strictly lower triangle is kept at zero.
template <typename Scalar>
class ScoreChartT
{
public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  ScoreChartT() = default;
  explicit ScoreChartT(int n, Scalar fill = Scalar(0)) : cells_(Matrix::Zero(n, n))
  {
    cells_.template triangularView<Eigen::Upper>().setConstant(fill);
  }

  // Takes the upper triangle of `m`.
  template <typename Derived>
  static ScoreChartT from_matrix(const Eigen::MatrixBase<Derived>& m)
  {
    ScoreChartT chart(static_cast<int>(m.rows()));
    chart.cells_.template triangularView<Eigen::Upper>() = m.template triangularView<Eigen::Upper>();
    return chart;
  }

  int size() const noexcept { return static_cast<int>(cells_.rows()); }

  Scalar operator()(int i, int j) const
  {
    assert(0 <= i && i <= j && j < size());
    return cells_(i, j);
  }
  Scalar& operator()(int i, int j)
  {
    assert(0 <= i && i <= j && j < size());
    return cells_(i, j);
  }

  const Matrix& matrix() const noexcept { return cells_; }

  bool all_finite() const { return cells_.allFinite(); }

  template <typename NewScalar>
  ScoreChartT<NewScalar> cast() const
  {
    return ScoreChartT<NewScalar>::from_matrix(cells_.template cast<NewScalar>());
  }

private:
  Matrix cells_;
};

using ScoreChart = ScoreChartT<double>;

} // namespace spanboot
