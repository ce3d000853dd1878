#pragma once

#include <Eigen/Core>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace marlens {

struct ShapeMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <class S>
using MatrixX = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using VectorX = Eigen::Matrix<S, Eigen::Dynamic, 1>;

/// Handle into a Tape. Only meaningful for the tape that produced it.
struct Var {
  int id = -1;
};

/// Reverse-mode tape over dense matrices. Rows are batch entries,
/// columns are features. forward() calls record nodes; backward()
/// walks them once in reverse and accumulates parameter gradients
/// into the sinks registered via leaf().
template <class S>
class Tape {
 public:
  using Mat = MatrixX<S>;

  Var constant(Mat v) { return push(std::move(v), false, {}, nullptr); }

  /// Parameter leaf: gradient accumulates into *sink on backward().
  Var leaf(const Mat& value, Mat* sink) {
    Var v = push(value, true, {}, nullptr);
    nodes_[v.id].sink = sink;
    return v;
  }

  const Mat& value(Var v) const { return nodes_[v.id].value; }
  const Mat& grad(Var v) const { return nodes_[v.id].grad; }

  Var matmul(Var a, Var b) {
    check(cols(a) == rows(b), "matmul inner dims");
    return unary_or_binary(a, b, value(a) * value(b), [this, a, b](const Mat& g) {
      add_grad(a, g * value(b).transpose());
      add_grad(b, value(a).transpose() * g);
    });
  }

  Var add(Var a, Var b) {
    check_same(a, b, "add");
    return unary_or_binary(a, b, value(a) + value(b), [this, a, b](const Mat& g) {
      add_grad(a, g);
      add_grad(b, g);
    });
  }

  Var sub(Var a, Var b) {
    check_same(a, b, "sub");
    return unary_or_binary(a, b, value(a) - value(b), [this, a, b](const Mat& g) {
      add_grad(a, g);
      add_grad(b, -g);
    });
  }

  /// a: B x C, bias: 1 x C broadcast over rows.
  Var add_rowvec(Var a, Var bias) {
    check(rows(bias) == 1 && cols(bias) == cols(a), "add_rowvec shapes");
    Mat out = value(a);
    out.rowwise() += value(bias).row(0);
    return unary_or_binary(a, bias, std::move(out), [this, a, bias](const Mat& g) {
      add_grad(a, g);
      add_grad(bias, g.colwise().sum());
    });
  }

  Var cmul(Var a, Var b) {
    check_same(a, b, "cmul");
    return unary_or_binary(a, b, value(a).cwiseProduct(value(b)), [this, a, b](const Mat& g) {
      add_grad(a, g.cwiseProduct(value(b)));
      add_grad(b, g.cwiseProduct(value(a)));
    });
  }

  Var cmin(Var a, Var b) {
    check_same(a, b, "cmin");
    return unary_or_binary(a, b, value(a).cwiseMin(value(b)), [this, a, b](const Mat& g) {
      // ties route the gradient to the first argument
      Mat pick_a = (value(a).array() <= value(b).array()).template cast<S>();
      add_grad(a, g.cwiseProduct(pick_a));
      add_grad(b, g.cwiseProduct(Mat(Mat::Ones(g.rows(), g.cols()) - pick_a)));
    });
  }

  Var scale(Var a, S k) {
    return unary(a, value(a) * k, [this, a, k](const Mat& g) { add_grad(a, g * k); });
  }

  Var neg(Var a) { return scale(a, S(-1)); }

  Var relu(Var a) {
    Mat out = value(a).cwiseMax(S(0));
    return unary(a, std::move(out), [this, a](const Mat& g) {
      add_grad(a, g.cwiseProduct(Mat((value(a).array() > S(0)).template cast<S>())));
    });
  }

  Var sigmoid(Var a) {
    Mat out = (S(1) / (S(1) + (-value(a).array()).exp())).matrix();
    Var v = unary(a, std::move(out), nullptr);
    nodes_[v.id].backprop = [this, a, v](const Mat& g) {
      const auto& y = value(v).array();
      add_grad(a, (g.array() * y * (S(1) - y)).matrix());
    };
    return v;
  }

  Var tanh_(Var a) {
    Mat out = value(a).array().tanh().matrix();
    Var v = unary(a, std::move(out), nullptr);
    nodes_[v.id].backprop = [this, a, v](const Mat& g) {
      const auto& y = value(v).array();
      add_grad(a, (g.array() * (S(1) - y * y)).matrix());
    };
    return v;
  }

  Var abs_(Var a) {
    return unary(a, value(a).cwiseAbs(), [this, a](const Mat& g) {
      add_grad(a, g.cwiseProduct(Mat(value(a).array().sign().matrix())));
    });
  }

  Var square(Var a) {
    return unary(a, value(a).cwiseProduct(value(a)), [this, a](const Mat& g) {
      add_grad(a, (g.array() * S(2) * value(a).array()).matrix());
    });
  }

  Var exp_(Var a) {
    Var v = unary(a, Mat(value(a).array().exp().matrix()), nullptr);
    nodes_[v.id].backprop = [this, a, v](const Mat& g) {
      add_grad(a, g.cwiseProduct(value(v)));
    };
    return v;
  }

  Var clamp(Var a, S lo, S hi) {
    Mat out = value(a).cwiseMax(lo).cwiseMin(hi);
    return unary(a, std::move(out), [this, a, lo, hi](const Mat& g) {
      Mat pass = ((value(a).array() > lo) && (value(a).array() < hi)).template cast<S>();
      add_grad(a, g.cwiseProduct(pass));
    });
  }

  /// Sum of all entries, as a 1x1 node. Accumulates in double.
  Var sum(Var a) {
    Mat out(1, 1);
    out(0, 0) = static_cast<S>(value(a).template cast<double>().sum());
    return unary(a, std::move(out), [this, a](const Mat& g) {
      add_grad(a, Mat(Mat::Constant(rows(a), cols(a), g(0, 0))));
    });
  }

  Var mean_all(Var a) {
    const S n = static_cast<S>(rows(a) * cols(a));
    return scale(sum(a), S(1) / n);
  }

  /// Row-wise sum, B x C -> B x 1.
  Var sum_rows(Var a) {
    Mat out = value(a).rowwise().sum();
    return unary(a, std::move(out), [this, a](const Mat& g) {
      add_grad(a, Mat(g * Mat::Ones(1, cols(a))));
    });
  }

  /// Numerically stable log-softmax across each row.
  Var log_softmax_rows(Var a) {
    Mat out = value(a);
    for (Eigen::Index r = 0; r < out.rows(); ++r) {
      S m = out.row(r).maxCoeff();
      double z = (out.row(r).array() - m).template cast<double>().exp().sum();
      out.row(r) = (out.row(r).array() - m - static_cast<S>(std::log(z))).matrix();
    }
    Var v = unary(a, std::move(out), nullptr);
    nodes_[v.id].backprop = [this, a, v](const Mat& g) {
      Mat p = value(v).array().exp().matrix();
      VectorX<S> rowsum = g.rowwise().sum();
      Mat da = g;
      da.array() -= p.array().colwise() * rowsum.array();
      add_grad(a, da);
    };
    return v;
  }

  /// Picks one column per row: out(b, 0) = a(b, idx[b]).
  Var gather_cols(Var a, std::vector<int> idx) {
    check(static_cast<Eigen::Index>(idx.size()) == rows(a), "gather_cols index count");
    Mat out(rows(a), 1);
    for (Eigen::Index b = 0; b < rows(a); ++b) out(b, 0) = value(a)(b, idx[b]);
    return unary(a, std::move(out), [this, a, idx = std::move(idx)](const Mat& g) {
      Mat da = Mat::Zero(rows(a), cols(a));
      for (Eigen::Index b = 0; b < da.rows(); ++b) da(b, idx[b]) += g(b, 0);
      add_grad(a, da);
    });
  }

  /// Per-row linear map: out.row(b) = x.row(b) * W_b + bias.row(b),
  /// where W_b(i, j) = w(b, j * n + i), n = x.cols(). Used for mixing
  /// networks whose weights are themselves network outputs.
  Var rowwise_linear(Var x, Var w, Var bias) {
    const Eigen::Index n = cols(x), B = rows(x);
    check(cols(w) % n == 0, "rowwise_linear weight width");
    const Eigen::Index m = cols(w) / n;
    check(rows(w) == B && rows(bias) == B && cols(bias) == m, "rowwise_linear shapes");
    Mat out(B, m);
    for (Eigen::Index b = 0; b < B; ++b) {
      VectorX<S> wrow = value(w).row(b);
      Eigen::Map<const Mat> W(wrow.data(), n, m);
      out.row(b) = value(x).row(b) * W + value(bias).row(b);
    }
    Var v = push(std::move(out), needs_grad(x) || needs_grad(w) || needs_grad(bias),
                 {x.id, w.id, bias.id}, nullptr);
    nodes_[v.id].backprop = [this, x, w, bias, n, m, B](const Mat& g) {
      Mat dx = Mat::Zero(B, n);
      Mat dw = Mat::Zero(B, n * m);
      for (Eigen::Index b = 0; b < B; ++b) {
        VectorX<S> wrow = value(w).row(b);
        Eigen::Map<const Mat> W(wrow.data(), n, m);
        dx.row(b) = g.row(b) * W.transpose();
        Mat dW = value(x).row(b).transpose() * g.row(b); // n x m
        VectorX<S> flat = Eigen::Map<VectorX<S>>(dW.data(), n * m);
        dw.row(b) = flat.transpose();
      }
      add_grad(x, dx);
      add_grad(w, dw);
      add_grad(bias, g);
    };
    return v;
  }

  /// Column concatenation of same-height blocks.
  Var hstack(const std::vector<Var>& parts) {
    check(!parts.empty(), "hstack of nothing");
    const Eigen::Index B = rows(parts[0]);
    Eigen::Index total = 0;
    bool needs = false;
    for (Var p : parts) {
      check(rows(p) == B, "hstack row counts");
      total += cols(p);
      needs = needs || needs_grad(p);
    }
    Mat out(B, total);
    Eigen::Index c = 0;
    for (Var p : parts) {
      out.middleCols(c, cols(p)) = value(p);
      c += cols(p);
    }
    Var v = push(std::move(out), needs, {}, nullptr);
    if (needs) {
      nodes_[v.id].backprop = [this, parts](const Mat& g) {
        Eigen::Index c = 0;
        for (Var p : parts) {
          add_grad(p, g.middleCols(c, cols(p)));
          c += cols(p);
        }
      };
    }
    return v;
  }

  /// Row concatenation of same-width blocks.
  Var vstack(const std::vector<Var>& parts) {
    check(!parts.empty(), "vstack of nothing");
    const Eigen::Index C = cols(parts[0]);
    Eigen::Index total = 0;
    bool needs = false;
    for (Var p : parts) {
      check(cols(p) == C, "vstack column counts");
      total += rows(p);
      needs = needs || needs_grad(p);
    }
    Mat out(total, C);
    Eigen::Index r = 0;
    for (Var p : parts) {
      out.middleRows(r, rows(p)) = value(p);
      r += rows(p);
    }
    Var v = push(std::move(out), needs, {}, nullptr);
    if (needs) {
      nodes_[v.id].backprop = [this, parts](const Mat& g) {
        Eigen::Index r = 0;
        for (Var p : parts) {
          add_grad(p, g.middleRows(r, rows(p)));
          r += rows(p);
        }
      };
    }
    return v;
  }

  /// Seeds the output gradient and propagates to every leaf sink.
  void backward(Var out, const Mat& seed) {
    check(seed.rows() == rows(out) && seed.cols() == cols(out), "backward seed shape");
    for (auto& n : nodes_)
      if (n.needs_grad) n.grad.setZero(n.value.rows(), n.value.cols());
    nodes_[out.id].grad = seed;
    for (int i = out.id; i >= 0; --i) {
      auto& n = nodes_[i];
      if (!n.needs_grad) continue;
      if (n.backprop) n.backprop(n.grad);
      if (n.sink) *n.sink += n.grad;
    }
  }

  void backward_scalar(Var out) {
    check(rows(out) == 1 && cols(out) == 1, "backward_scalar on non-scalar");
    backward(out, Mat::Ones(1, 1));
  }

  Eigen::Index rows(Var v) const { return value(v).rows(); }
  Eigen::Index cols(Var v) const { return value(v).cols(); }
  bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }
  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Mat value;
    Mat grad;
    bool needs_grad = false;
    std::function<void(const Mat&)> backprop;
    Mat* sink = nullptr;
  };

  static void check(bool ok, const char* what) {
    if (!ok) throw ShapeMismatch(std::string("shape mismatch: ") + what);
  }
  void check_same(Var a, Var b, const char* what) const {
    check(rows(a) == rows(b) && cols(a) == cols(b), what);
  }

  Var push(Mat value, bool needs, std::initializer_list<int>, Mat* sink) {
    Node n;
    n.value = std::move(value);
    n.needs_grad = needs;
    n.sink = sink;
    nodes_.push_back(std::move(n));
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  Var unary(Var a, Mat value, std::function<void(const Mat&)> bp) {
    Var v = push(std::move(value), needs_grad(a), {a.id}, nullptr);
    if (needs_grad(a)) nodes_[v.id].backprop = std::move(bp);
    return v;
  }

  Var unary_or_binary(Var a, Var b, Mat value, std::function<void(const Mat&)> bp) {
    const bool needs = needs_grad(a) || needs_grad(b);
    Var v = push(std::move(value), needs, {a.id, b.id}, nullptr);
    if (needs) nodes_[v.id].backprop = std::move(bp);
    return v;
  }

  void add_grad(Var v, const Mat& g) {
    if (nodes_[v.id].needs_grad) nodes_[v.id].grad += g;
  }

  std::vector<Node> nodes_;
};

} // namespace marlens
