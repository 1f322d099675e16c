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

#include "redmx/square_matrix.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <vector>

namespace redmx {

using Eigen::Index;

namespace {

struct Run {
  Index source;
  Index target;
  Index length;
};

// Maximal runs of kept indices in [0, size) after removing `indices`.
std::vector<Run> kept_runs(std::span<const Index> indices, Index size) {
  std::vector<Run> runs;
  Index next = 0;
  Index target = 0;
  for (Index r : indices) {
    if (r > next) {
      runs.push_back({next, target, r - next});
      target += r - next;
    }
    next = r + 1;
  }
  if (next < size) runs.push_back({next, target, size - next});
  return runs;
}

}  // namespace

GrowableSquareMatrix::GrowableSquareMatrix(Index size, Index capacity) {
  reserve(std::max(size, capacity));
  size_ = size;
  if (capacity_ > 0) std::fill_n(data_.get(), capacity_ * capacity_, 0.0);
}

GrowableSquareMatrix::GrowableSquareMatrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix is not square");
  resize(m.rows());
  view() = m;
}

GrowableSquareMatrix::GrowableSquareMatrix(const GrowableSquareMatrix& other) {
  resize(other.size_);
  view() = other.view();
}

GrowableSquareMatrix& GrowableSquareMatrix::operator=(const GrowableSquareMatrix& other) {
  if (this != &other) {
    resize(other.size_);
    view() = other.view();
  }
  return *this;
}

Index GrowableSquareMatrix::grown(Index size) { return size + size / 32 + 64; }

void GrowableSquareMatrix::reserve(Index capacity) {
  if (capacity <= capacity_) return;
  std::unique_ptr<double[]> fresh(new double[static_cast<std::size_t>(capacity * capacity)]);
  for (Index j = 0; j < size_; ++j) {
    std::memcpy(fresh.get() + j * capacity, data_.get() + j * capacity_,
                static_cast<std::size_t>(size_) * sizeof(double));
  }
  data_ = std::move(fresh);
  capacity_ = capacity;
}

void GrowableSquareMatrix::resize(Index size) {
  if (size < 0) throw std::invalid_argument("negative size");
  if (size > capacity_) {
    data_.reset();
    capacity_ = 0;
    size_ = 0;
    reserve(grown(size));
  }
  size_ = size;
}

void GrowableSquareMatrix::insert(Index at, Index count) {
  if (at < 0 || at > size_ || count < 0) throw std::out_of_range("insert position");
  if (count == 0) return;
  const Index n = size_;
  const Index next = n + count;
  if (next > capacity_) reserve(grown(next));
  double* base = data_.get();
  const Index ld = capacity_;
  const Index tail = n - at;
  for (Index j = n - 1; j >= 0; --j) {
    double* src = base + j * ld;
    double* dst = base + (j < at ? j : j + count) * ld;
    if (tail > 0) {
      std::memmove(dst + at + count, src + at, static_cast<std::size_t>(tail) * sizeof(double));
    }
    if (dst != src && at > 0) {
      std::memcpy(dst, src, static_cast<std::size_t>(at) * sizeof(double));
    }
    std::fill_n(dst + at, count, 0.0);
  }
  for (Index j = at; j < at + count; ++j) std::fill_n(base + j * ld, next, 0.0);
  size_ = next;
}

void GrowableSquareMatrix::erase(std::span<const Index> indices) {
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (indices[i] < 0 || indices[i] >= size_ || (i > 0 && indices[i] <= indices[i - 1])) {
      throw std::out_of_range("erase indices must be increasing and in range");
    }
  }
  if (indices.empty()) return;
  const std::vector<Run> runs = kept_runs(indices, size_);
  double* base = data_.get();
  const Index ld = capacity_;
  for (const Run& columns : runs) {
    for (Index c = 0; c < columns.length; ++c) {
      const double* src = base + (columns.source + c) * ld;
      double* dst = base + (columns.target + c) * ld;
      for (const Run& rows : runs) {
        if (dst == src && rows.source == rows.target) continue;
        std::memmove(dst + rows.target, src + rows.source,
                     static_cast<std::size_t>(rows.length) * sizeof(double));
      }
    }
  }
  size_ -= static_cast<Index>(indices.size());
}

}  // namespace redmx
