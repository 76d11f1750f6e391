#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ctt/errors.hpp"
#include "ctt/rng.hpp"

namespace ctt {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

namespace detail {

struct TensorImpl {
  Shape shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until backward touches this node
  bool requires_grad = false;

  std::size_t numel() const { return data.size(); }
  void ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
  }
};

}  // namespace detail

class Tape;

/// Dense fp64 tensor with value semantics over a shared payload.
/// Data is row-major. Tensors are immutable once they have entered a
/// graph; leaves may be edited in place between graphs (optimizer steps).
class Tensor {
 public:
  Tensor() = default;

  static Tensor zeros(Shape shape, bool requires_grad = false);
  static Tensor full(Shape shape, double value, bool requires_grad = false);
  static Tensor from_data(Shape shape, std::vector<double> data, bool requires_grad = false);
  static Tensor scalar(double value, bool requires_grad = false);
  static Tensor randn(Shape shape, Rng& rng, double sigma, bool requires_grad = false);
  /// Truncated normal: resample outside +/- 2 sigma.
  static Tensor trunc_normal(Shape shape, Rng& rng, double sigma, bool requires_grad = false);
  static Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng,
                               bool requires_grad = false);

  bool defined() const { return impl_ != nullptr; }
  const Shape& shape() const { return impl_->shape; }
  std::size_t rank() const { return impl_->shape.size(); }
  std::size_t extent(std::size_t axis) const { return impl_->shape[axis]; }
  std::size_t numel() const { return impl_->data.size(); }

  std::span<const double> data() const { return impl_->data; }
  /// In-place access for leaf initialization and optimizer updates only.
  std::span<double> raw_data() { return impl_->data; }

  /// Value of a single-element tensor.
  double value() const;

  bool requires_grad() const { return impl_->requires_grad; }
  Tensor& set_requires_grad(bool flag) {
    impl_->requires_grad = flag;
    return *this;
  }

  bool has_grad() const { return impl_ && impl_->grad.size() == impl_->data.size(); }
  std::span<const double> grad() const { return impl_->grad; }
  std::span<double> grad_mutable() {
    impl_->ensure_grad();
    return impl_->grad;
  }
  void zero_grad() {
    if (impl_) impl_->grad.assign(impl_->data.size(), 0.0);
  }

  std::shared_ptr<detail::TensorImpl> impl() const { return impl_; }
  static Tensor wrap(std::shared_ptr<detail::TensorImpl> impl) { return Tensor(std::move(impl)); }

 private:
  explicit Tensor(std::shared_ptr<detail::TensorImpl> impl) : impl_(std::move(impl)) {}
  std::shared_ptr<detail::TensorImpl> impl_;
};

/// Ordered record of differentiable ops (define-by-run reverse mode).
/// A tape is activated with TapeScope; ops executed while it is active
/// append backward closures. backward() replays them in exact reverse
/// execution order. Leaf gradients accumulate across backward calls;
/// intermediate gradients are reset per call.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  void record(std::shared_ptr<detail::TensorImpl> output, std::function<void()> fn);
  bool owns(const detail::TensorImpl* node) const;

  /// Seeds d(root)/d(root) = 1 and replays the tape backward.
  /// Throws ContractError if root is not a scalar produced on this tape.
  void backward(const Tensor& root);

  /// Drops every record and the intermediates they keep alive.
  void clear();

  std::size_t op_count() const { return records_.size(); }

 private:
  struct Record {
    std::shared_ptr<detail::TensorImpl> output;
    std::function<void()> fn;
  };
  std::vector<Record> records_;
};

/// Activates a tape for the current thread for the scope's lifetime.
class TapeScope {
 public:
  explicit TapeScope(Tape& tape);
  ~TapeScope();
  TapeScope(const TapeScope&) = delete;
  TapeScope& operator=(const TapeScope&) = delete;

 private:
  Tape* previous_;
};

Tape* active_tape();

// ---- differentiable op set ----

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor divide(const Tensor& a, const Tensor& b);
Tensor maximum(const Tensor& a, const Tensor& b);  // ties route grad to a
Tensor minimum(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
/// Broadcasts a length-d vector over the rows of [... x d].
Tensor add_rowvec(const Tensor& x, const Tensor& row);

Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose2d(const Tensor& a);
Tensor reshape(const Tensor& a, Shape new_shape);
Tensor concat(std::span<const Tensor> parts, std::size_t axis);
Tensor concat(std::initializer_list<Tensor> parts, std::size_t axis);
Tensor slice(const Tensor& a, std::size_t axis, std::size_t start, std::size_t len);
/// Gathers rows of a rank>=2 tensor; duplicate indices accumulate on backward.
Tensor take_rows(const Tensor& a, std::span<const std::size_t> rows);
/// Copies x and overwrites the listed rows with a single broadcast row vector.
Tensor replace_rows(const Tensor& x, std::span<const std::size_t> rows, const Tensor& row);

/// Softmax over the last dimension with optional additive mask
/// (-inf excludes an entry; masked outputs are exactly 0). Rows are
/// stabilized by max subtraction. Throws DegenerateRowError when a row
/// has no finite entry left.
Tensor masked_softmax_lastdim(const Tensor& x, const std::optional<Tensor>& additive_mask = {});

Tensor layer_norm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-6);

/// tanh-approximation GELU, 0.5x(1 + tanh(sqrt(2/pi)(x + 0.044715 x^3))).
Tensor gelu(const Tensor& x);
Tensor sigmoid(const Tensor& x);

Tensor sum(const Tensor& x);
Tensor mean(const Tensor& x);
Tensor mse_loss(const Tensor& pred, const Tensor& target);
Tensor l1_loss(const Tensor& pred, const Tensor& target);
/// Numerically stable binary cross-entropy on a scalar logit.
Tensor bce_with_logits(const Tensor& logit, double target);

// ---- verification ----

struct FdReport {
  double max_rel_err = 0.0;
  std::size_t worst_index = 0;
  double analytic_at_worst = 0.0;
  double numeric_at_worst = 0.0;
  std::size_t entries_checked = 0;
  bool pass = false;
};

/// Central finite-difference check of the tape gradient of f at x0.
/// f must build a scalar graph from its argument. Relative error uses
/// a unit floor so near-zero gradients compare absolutely.
FdReport finite_diff_check(const std::function<Tensor(const Tensor&)>& f, const Tensor& x0,
                           double h, double tol);

// ---- flat binary dump/load (little-endian) ----

void dump_tensor(const Tensor& t, std::ostream& out);
Tensor load_tensor(std::istream& in);
void save_tensor_file(const std::filesystem::path& path, const Tensor& t);
Tensor load_tensor_file(const std::filesystem::path& path);

}  // namespace ctt
