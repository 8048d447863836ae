#include "graphtag/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace graphtag {

std::string shape_string(const Shape& shape) {
  std::ostringstream out;
  out << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ", ";
    out << shape[i];
  }
  out << ']';
  return out.str();
}

std::size_t shape_size(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                         std::multiplies<>());
}

void throw_shape_mismatch(const std::string& op, const Shape& a, const Shape& b) {
  throw ShapeError(op + ": shape mismatch " + shape_string(a) + " vs " +
                   shape_string(b));
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(shape_size(shape_), fill) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive: " + shape_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  for (std::size_t d : shape_) {
    if (d == 0) throw ShapeError("tensor dimensions must be positive: " + shape_string(shape_));
  }
  if (data_.size() != shape_size(shape_)) {
    throw ShapeError("tensor data has " + std::to_string(data_.size()) +
                     " values but shape " + shape_string(shape_) + " needs " +
                     std::to_string(shape_size(shape_)));
  }
}

Tensor Tensor::scalar(double v) { return Tensor(Shape{}, std::vector<double>{v}); }

Tensor Tensor::vector(std::vector<double> values) {
  const std::size_t n = values.size();
  return Tensor(Shape{n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor(Shape{rows, cols}, std::move(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t r = rows.size();
  const std::size_t c = r ? rows.begin()->size() : 0;
  std::vector<double> values;
  values.reserve(r * c);
  for (const auto& row : rows) {
    if (row.size() != c) throw ShapeError("ragged matrix literal");
    values.insert(values.end(), row.begin(), row.end());
  }
  return Tensor(Shape{r, c}, std::move(values));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t(Shape{n, n});
  for (std::size_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
  return t;
}

std::size_t Tensor::cols() const {
  if (shape_.size() <= 1) return shape_.empty() ? 1 : shape_[0];
  return data_.size() / shape_[0];
}

double Tensor::item() const {
  if (data_.size() != 1) {
    throw ShapeError("item() on non-scalar tensor of shape " + shape_string(shape_));
  }
  return data_[0];
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_size(shape) != data_.size()) throw_shape_mismatch("reshape", shape_, shape);
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

bool same_shape(const Tensor& a, const Tensor& b) { return a.shape() == b.shape(); }

double max_abs_diff(const Tensor& a, const Tensor& b) {
  if (!same_shape(a, b)) throw_shape_mismatch("max_abs_diff", a.shape(), b.shape());
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

namespace {

// Row layout for row-wise softmax: a rank-1 tensor is one row.
std::pair<std::size_t, std::size_t> row_layout(const Tensor& t) {
  if (t.rank() == 0) return {1, 1};
  const std::size_t width = t.shape().back();
  return {t.size() / width, width};
}

}  // namespace

Tensor softmax_rows(const Tensor& logits) {
  Tensor out = logits;
  const auto [rows, width] = row_layout(logits);
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = out.data().data() + r * width;
    const double mx = *std::max_element(row, row + width);
    double z = 0.0;
    for (std::size_t j = 0; j < width; ++j) {
      row[j] = std::exp(row[j] - mx);
      z += row[j];
    }
    for (std::size_t j = 0; j < width; ++j) row[j] /= z;
  }
  return out;
}

Tensor log_softmax_rows(const Tensor& logits) {
  Tensor out = logits;
  const auto [rows, width] = row_layout(logits);
  for (std::size_t r = 0; r < rows; ++r) {
    double* row = out.data().data() + r * width;
    const double mx = *std::max_element(row, row + width);
    double z = 0.0;
    for (std::size_t j = 0; j < width; ++j) z += std::exp(row[j] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < width; ++j) row[j] -= lz;
  }
  return out;
}

}  // namespace graphtag
