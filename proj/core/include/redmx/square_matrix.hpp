// Copyright 2026 The Redmx Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef REDMX_SQUARE_MATRIX_HPP_
#define REDMX_SQUARE_MATRIX_HPP_

#include <cstdint>
#include <memory>
#include <span>

#include <Eigen/Core>

namespace redmx {

/// Counts floating point operations of the dense kernels it is passed to.
struct OpCounter {
  std::uint64_t ops = 0;

  void add(double n) { ops += static_cast<std::uint64_t>(n); }
  void reset() { ops = 0; }
};

inline void count(OpCounter* counter, double n) {
  if (counter != nullptr) counter->add(n);
}

/// Dense column-major square matrix whose leading dimension may exceed its
/// size, so that rows and columns can be inserted or erased in place.
class GrowableSquareMatrix {
 public:
  using View = Eigen::Map<Eigen::MatrixXd, Eigen::Unaligned, Eigen::OuterStride<>>;
  using ConstView =
      Eigen::Map<const Eigen::MatrixXd, Eigen::Unaligned, Eigen::OuterStride<>>;

  GrowableSquareMatrix() = default;
  explicit GrowableSquareMatrix(Eigen::Index size, Eigen::Index capacity = 0);
  explicit GrowableSquareMatrix(const Eigen::MatrixXd& m);

  GrowableSquareMatrix(const GrowableSquareMatrix& other);
  GrowableSquareMatrix& operator=(const GrowableSquareMatrix& other);
  GrowableSquareMatrix(GrowableSquareMatrix&&) noexcept = default;
  GrowableSquareMatrix& operator=(GrowableSquareMatrix&&) noexcept = default;

  Eigen::Index size() const { return size_; }
  Eigen::Index capacity() const { return capacity_; }

  View view() { return View(data_.get(), size_, size_, Eigen::OuterStride<>(stride())); }
  ConstView view() const {
    return ConstView(data_.get(), size_, size_, Eigen::OuterStride<>(stride()));
  }
  double& operator()(Eigen::Index i, Eigen::Index j) { return data_[j * capacity_ + i]; }
  double operator()(Eigen::Index i, Eigen::Index j) const { return data_[j * capacity_ + i]; }

  /// Resizes without preserving contents; grows storage only when needed.
  void resize(Eigen::Index size);
  void reserve(Eigen::Index capacity);
  /// Inserts `count` zero rows and columns before index `at`.
  void insert(Eigen::Index at, Eigen::Index count);
  /// Erases the given rows and columns (strictly increasing indices).
  void erase(std::span<const Eigen::Index> indices);

  Eigen::MatrixXd to_dense() const { return view(); }

 private:
  Eigen::Index stride() const { return capacity_ > 0 ? capacity_ : 1; }
  static Eigen::Index grown(Eigen::Index size);

  std::unique_ptr<double[]> data_;
  Eigen::Index size_ = 0;
  Eigen::Index capacity_ = 0;
};

}  // namespace redmx

#endif  // REDMX_SQUARE_MATRIX_HPP_
