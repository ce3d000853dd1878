#pragma once

#include "marlens/params.hpp"
#include "marlens/rng.hpp"
#include "marlens/tape.hpp"

#include <Eigen/QR>
#include <cmath>
#include <optional>
#include <string>

namespace marlens {

enum class BodyKind { FC, GRU };

struct NetSpec {
  int input_dim = 0;
  int hidden_dim = 0;
  int output_dim = 0;
  BodyKind body = BodyKind::FC;
  int n_hidden_layers = 1;
};

/// Orthogonal matrix scaled by `gain`, sign-fixed against the QR
/// decomposition's R diagonal so the draw is deterministic in the
/// gaussian sample.
template <class S>
MatrixX<S> orthogonal_init(Eigen::Index rows, Eigen::Index cols, double gain, Rng& rng) {
  const Eigen::Index big = std::max(rows, cols);
  MatrixX<S> a(big, std::min(rows, cols));
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = static_cast<S>(rng.normal());
  Eigen::HouseholderQR<MatrixX<S>> qr(a);
  MatrixX<S> q = qr.householderQ() * MatrixX<S>::Identity(big, a.cols());
  MatrixX<S> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    if (r(j, j) < S(0)) q.col(j) = -q.col(j);
  MatrixX<S> w = (rows >= cols) ? q : MatrixX<S>(q.transpose());
  return static_cast<S>(gain) * w;
}

/// MLP or GRU network whose parameters live in a ParamStore under a
/// name prefix. Inputs are row-major batches (B x input_dim); GRU
/// hidden state is B x hidden_dim and must be threaded by the caller.
template <class S>
class Network {
 public:
  using Mat = MatrixX<S>;

  Network() = default;
  Network(NetSpec spec, std::string prefix) : spec_(spec), prefix_(std::move(prefix)) {}

  const NetSpec& spec() const { return spec_; }

  /// head_gain 0.01 for policy heads, sqrt(2) elsewhere.
  void init_params(ParamStore<S>& store, Rng& rng, double head_gain = std::sqrt(2.0)) const {
    const double g = std::sqrt(2.0);
    if (spec_.body == BodyKind::FC) {
      int in = spec_.input_dim;
      for (int l = 0; l < spec_.n_hidden_layers; ++l) {
        store.add(key("w", l), in, spec_.hidden_dim) =
            orthogonal_init<S>(in, spec_.hidden_dim, g, rng);
        store.add(key("b", l), 1, spec_.hidden_dim);
        in = spec_.hidden_dim;
      }
    } else {
      store.add(key("w", 0), spec_.input_dim, spec_.hidden_dim) =
          orthogonal_init<S>(spec_.input_dim, spec_.hidden_dim, g, rng);
      store.add(key("b", 0), 1, spec_.hidden_dim);
      const int h = spec_.hidden_dim;
      for (const char* gate : {"z", "r", "n"}) {
        store.add(gru_key("w", gate), h, h) = orthogonal_init<S>(h, h, g, rng);
        store.add(gru_key("u", gate), h, h) = orthogonal_init<S>(h, h, g, rng);
        store.add(gru_key("b", gate), 1, h);
      }
    }
    store.add(prefix_ + ".head.w", spec_.hidden_dim, spec_.output_dim) =
        orthogonal_init<S>(spec_.hidden_dim, spec_.output_dim, head_gain, rng);
    store.add(prefix_ + ".head.b", 1, spec_.output_dim);
  }

  Mat initial_hidden(Eigen::Index batch) const {
    return Mat::Zero(batch, spec_.hidden_dim);
  }

  /// Tape-free forward for rollouts and evaluation.
  Mat forward(const ParamStore<S>& store, const Mat& x, Mat* hidden = nullptr) const {
    check_input(x, hidden);
    Mat h;
    if (spec_.body == BodyKind::FC) {
      h = x;
      for (int l = 0; l < spec_.n_hidden_layers; ++l)
        h = affine(store, h, key("w", l), key("b", l)).cwiseMax(S(0));
    } else {
      Mat pre = affine(store, x, key("w", 0), key("b", 0)).cwiseMax(S(0));
      const Mat& hin = *hidden;
      Mat z = gate(store, pre, hin, "z");
      Mat r = gate(store, pre, hin, "r");
      Mat n = (pre * store.at(gru_key("w", "n")).value +
               r.cwiseProduct(hin * store.at(gru_key("u", "n")).value));
      n.rowwise() += store.at(gru_key("b", "n")).value.row(0);
      n = n.array().tanh().matrix();
      h = z.cwiseProduct(hin) + (Mat::Ones(z.rows(), z.cols()) - z).cwiseProduct(n);
      *hidden = h;
    }
    return affine(store, h, prefix_ + ".head.w", prefix_ + ".head.b");
  }

  /// Taped forward for training. `hidden` (GRU only) is consumed and
  /// replaced with the taped next hidden state.
  Var forward(Tape<S>& tape, ParamStore<S>& store, Var x, Var* hidden = nullptr) const {
    if (spec_.body == BodyKind::GRU && hidden == nullptr)
      throw ShapeMismatch("GRU forward requires a hidden state");
    Var h;
    if (spec_.body == BodyKind::FC) {
      h = x;
      for (int l = 0; l < spec_.n_hidden_layers; ++l)
        h = tape.relu(affine(tape, store, h, key("w", l), key("b", l)));
    } else {
      Var pre = tape.relu(affine(tape, store, x, key("w", 0), key("b", 0)));
      Var hin = *hidden;
      Var z = gate(tape, store, pre, hin, "z");
      Var r = gate(tape, store, pre, hin, "r");
      Var n = tape.tanh_(tape.add_rowvec(
          tape.add(tape.matmul(pre, param(tape, store, gru_key("w", "n"))),
                   tape.cmul(r, tape.matmul(hin, param(tape, store, gru_key("u", "n"))))),
          param(tape, store, gru_key("b", "n"))));
      Var one_minus_z = tape.sub(tape.constant(Mat::Ones(tape.rows(z), tape.cols(z))), z);
      h = tape.add(tape.cmul(z, hin), tape.cmul(one_minus_z, n));
      *hidden = h;
    }
    return affine(tape, store, h, prefix_ + ".head.w", prefix_ + ".head.b");
  }

 private:
  std::string key(const char* kind, int layer) const {
    return prefix_ + "." + kind + std::to_string(layer);
  }
  std::string gru_key(const char* kind, const char* gate) const {
    return prefix_ + ".gru." + kind + gate;
  }

  void check_input(const Mat& x, const Mat* hidden) const {
    if (x.cols() != spec_.input_dim) throw ShapeMismatch("network input width");
    if (spec_.body == BodyKind::GRU) {
      if (!hidden) throw ShapeMismatch("GRU forward requires a hidden state");
      if (hidden->rows() != x.rows() || hidden->cols() != spec_.hidden_dim)
        throw ShapeMismatch("GRU hidden state shape");
    }
  }

  Mat affine(const ParamStore<S>& store, const Mat& x, const std::string& w,
             const std::string& b) const {
    Mat out = x * store.at(w).value;
    out.rowwise() += store.at(b).value.row(0);
    return out;
  }

  Mat gate(const ParamStore<S>& store, const Mat& pre, const Mat& hin, const char* g) const {
    Mat a = pre * store.at(gru_key("w", g)).value + hin * store.at(gru_key("u", g)).value;
    a.rowwise() += store.at(gru_key("b", g)).value.row(0);
    return (S(1) / (S(1) + (-a.array()).exp())).matrix();
  }

  static Var param(Tape<S>& tape, ParamStore<S>& store, const std::string& name) {
    auto& e = store.at(name);
    return tape.leaf(e.value, &e.grad);
  }

  Var affine(Tape<S>& tape, ParamStore<S>& store, Var x, const std::string& w,
             const std::string& b) const {
    return tape.add_rowvec(tape.matmul(x, param(tape, store, w)), param(tape, store, b));
  }

  Var gate(Tape<S>& tape, ParamStore<S>& store, Var pre, Var hin, const char* g) const {
    return tape.sigmoid(tape.add_rowvec(
        tape.add(tape.matmul(pre, param(tape, store, gru_key("w", g))),
                 tape.matmul(hin, param(tape, store, gru_key("u", g)))),
        param(tape, store, gru_key("b", g))));
  }

  NetSpec spec_;
  std::string prefix_;
};

} // namespace marlens
