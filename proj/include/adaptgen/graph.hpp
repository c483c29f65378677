#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

namespace adaptgen {

template <class Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Reverse-mode tape over dense matrices. A Graph lives for one forward/backward
// pass; parameters are registered per pass and their gradients read back out
// afterwards. All ops are deterministic and single-threaded.
template <class Scalar>
class Graph {
 public:
  using Mat = Matrix<Scalar>;

  struct Var {
    int id = -1;
    bool valid() const { return id >= 0; }
  };

  Var input(Mat value, bool needs_grad) {
    nodes_.push_back(Node{std::move(value), Mat(), nullptr, needs_grad});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  const Mat& value(Var v) const { return nodes_[v.id].value; }

  const Mat& grad(Var v) const {
    if (nodes_[v.id].grad.size() == 0) zero_grad(v.id);
    return nodes_[v.id].grad;
  }

  Var matmul(Var a, Var b) {
    Var out = make(value(a) * value(b), a, b);
    nodes_[out.id].backward = [this, a, b, out] {
      if (needs(a)) acc(a) += nodes_[out.id].grad * value(b).transpose();
      if (needs(b)) acc(b) += value(a).transpose() * nodes_[out.id].grad;
    };
    return out;
  }

  // a * b^T without materializing the transpose as a node.
  Var matmul_nt(Var a, Var b) {
    Var out = make(value(a) * value(b).transpose(), a, b);
    nodes_[out.id].backward = [this, a, b, out] {
      if (needs(a)) acc(a) += nodes_[out.id].grad * value(b);
      if (needs(b)) acc(b) += nodes_[out.id].grad.transpose() * value(a);
    };
    return out;
  }

  Var add(Var a, Var b) {
    Var out = make(value(a) + value(b), a, b);
    nodes_[out.id].backward = [this, a, b, out] {
      if (needs(a)) acc(a) += nodes_[out.id].grad;
      if (needs(b)) acc(b) += nodes_[out.id].grad;
    };
    return out;
  }

  // Adds a 1 x cols bias to every row of a.
  Var add_rowvec(Var a, Var bias) {
    Mat v = value(a);
    v.rowwise() += value(bias).row(0);
    Var out = make(std::move(v), a, bias);
    nodes_[out.id].backward = [this, a, bias, out] {
      if (needs(a)) acc(a) += nodes_[out.id].grad;
      if (needs(bias)) acc(bias).row(0) += nodes_[out.id].grad.colwise().sum();
    };
    return out;
  }

  Var scale(Var a, Scalar s) {
    Var out = make(value(a) * s, a);
    nodes_[out.id].backward = [this, a, s, out] {
      if (needs(a)) acc(a) += nodes_[out.id].grad * s;
    };
    return out;
  }

  // Elementwise alpha * a + beta.
  Var affine(Var a, Scalar alpha, Scalar beta) {
    Var out = make((value(a).array() * alpha + beta).matrix(), a);
    nodes_[out.id].backward = [this, a, alpha, out] {
      if (needs(a)) acc(a) += nodes_[out.id].grad * alpha;
    };
    return out;
  }

  Var relu(Var a) {
    Var out = make(value(a).cwiseMax(Scalar(0)), a);
    nodes_[out.id].backward = [this, a, out] {
      if (needs(a)) {
        acc(a).array() +=
            nodes_[out.id].grad.array() * (value(a).array() > Scalar(0)).template cast<Scalar>();
      }
    };
    return out;
  }

  // Row-wise softmax with an optional additive mask (same shape; use a large
  // negative value at excluded positions).
  Var softmax_rows(Var a, const Mat* additive_mask = nullptr) {
    Mat z = value(a);
    if (additive_mask) {
      if (additive_mask->rows() != z.rows() || additive_mask->cols() != z.cols()) {
        throw std::runtime_error("softmax mask shape mismatch");
      }
      z += *additive_mask;
    }
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const Scalar m = z.row(r).maxCoeff();
      z.row(r) = (z.row(r).array() - m).exp();
      z.row(r) /= z.row(r).sum();
    }
    Var out = make(std::move(z), a);
    nodes_[out.id].backward = [this, a, out] {
      if (!needs(a)) return;
      const Mat& p = nodes_[out.id].value;
      const Mat& g = nodes_[out.id].grad;
      Mat& ga = acc(a);
      for (Eigen::Index r = 0; r < p.rows(); ++r) {
        const Scalar dot = p.row(r).dot(g.row(r));
        ga.row(r).array() += p.row(r).array() * (g.row(r).array() - dot);
      }
    };
    return out;
  }

  // Per-row layer normalization with learned gain and bias (each 1 x cols).
  Var layer_norm(Var a, Var gain, Var bias, Scalar eps = Scalar(1e-5)) {
    const Mat& x = value(a);
    const Eigen::Index d = x.cols();
    Mat xhat(x.rows(), d);
    Mat inv_sigma(x.rows(), 1);
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      const Scalar mu = x.row(r).mean();
      const Scalar var = (x.row(r).array() - mu).square().mean();
      const Scalar is = Scalar(1) / std::sqrt(var + eps);
      inv_sigma(r, 0) = is;
      xhat.row(r) = (x.row(r).array() - mu) * is;
    }
    Mat y = xhat;
    y.array().rowwise() *= value(gain).row(0).array();
    y.rowwise() += value(bias).row(0);
    Var out = make(std::move(y), a, gain, bias);
    nodes_[out.id].backward = [this, a, gain, bias, out, xhat, inv_sigma, d] {
      const Mat& g = nodes_[out.id].grad;
      if (needs(gain)) acc(gain).row(0) += (g.array() * xhat.array()).colwise().sum().matrix();
      if (needs(bias)) acc(bias).row(0) += g.colwise().sum();
      if (needs(a)) {
        Mat& ga = acc(a);
        const auto gamma = value(gain).row(0).array();
        for (Eigen::Index r = 0; r < g.rows(); ++r) {
          // dxhat = g * gamma; dx = is/d * (d*dxhat - sum(dxhat) - xhat*sum(dxhat*xhat))
          Eigen::Array<Scalar, 1, Eigen::Dynamic> dxhat = g.row(r).array() * gamma;
          const Scalar s1 = dxhat.sum();
          const Scalar s2 = (dxhat * xhat.row(r).array()).sum();
          ga.row(r).array() += inv_sigma(r, 0) / Scalar(d) *
                               (Scalar(d) * dxhat - s1 - xhat.row(r).array() * s2);
        }
      }
    };
    return out;
  }

  // Gathers rows of an embedding table by index.
  Var rows(Var table, const std::vector<int>& ids) {
    const Mat& t = value(table);
    Mat v(static_cast<Eigen::Index>(ids.size()), t.cols());
    for (std::size_t i = 0; i < ids.size(); ++i) {
      if (ids[i] < 0 || ids[i] >= t.rows()) throw std::runtime_error("row gather index out of range");
      v.row(static_cast<Eigen::Index>(i)) = t.row(ids[i]);
    }
    Var out = make(std::move(v), table);
    nodes_[out.id].backward = [this, table, ids, out] {
      if (!needs(table)) return;
      Mat& gt = acc(table);
      const Mat& g = nodes_[out.id].grad;
      for (std::size_t i = 0; i < ids.size(); ++i) {
        gt.row(ids[i]) += g.row(static_cast<Eigen::Index>(i));
      }
    };
    return out;
  }

  Var slice_cols(Var a, Eigen::Index start, Eigen::Index n) {
    Var out = make(value(a).middleCols(start, n), a);
    nodes_[out.id].backward = [this, a, start, n, out] {
      if (needs(a)) acc(a).middleCols(start, n) += nodes_[out.id].grad;
    };
    return out;
  }

  Var concat_cols(const std::vector<Var>& parts) {
    Eigen::Index cols = 0;
    for (Var p : parts) cols += value(p).cols();
    Mat v(value(parts[0]).rows(), cols);
    Eigen::Index at = 0;
    for (Var p : parts) {
      v.middleCols(at, value(p).cols()) = value(p);
      at += value(p).cols();
    }
    Var out = make(std::move(v), parts);
    nodes_[out.id].backward = [this, parts, out] {
      Eigen::Index at = 0;
      for (Var p : parts) {
        const Eigen::Index w = value(p).cols();
        if (needs(p)) acc(p) += nodes_[out.id].grad.middleCols(at, w);
        at += w;
      }
    };
    return out;
  }

  // Mean over rows -> 1 x cols.
  Var mean_rows(Var a) {
    const Scalar inv = Scalar(1) / Scalar(value(a).rows());
    Mat v = value(a).colwise().sum() * inv;
    Var out = make(std::move(v), a);
    nodes_[out.id].backward = [this, a, inv, out] {
      if (needs(a)) acc(a).array().rowwise() += nodes_[out.id].grad.row(0).array() * inv;
    };
    return out;
  }

  // Mean negative log-likelihood over active rows; returns a 1x1 node.
  // Inactive rows (e.g. pad targets) contribute nothing.
  Var cross_entropy_rows(Var logits, const std::vector<int>& targets,
                         const std::vector<bool>& active) {
    const Mat& z = value(logits);
    if (static_cast<std::size_t>(z.rows()) != targets.size() || targets.size() != active.size()) {
      throw std::runtime_error("cross entropy shape mismatch");
    }
    Eigen::Index n_active = 0;
    for (bool b : active) n_active += b ? 1 : 0;
    if (n_active == 0) throw std::runtime_error("cross entropy with no active targets");

    Mat probs(z.rows(), z.cols());
    Scalar loss = 0;
    for (Eigen::Index r = 0; r < z.rows(); ++r) {
      const Scalar m = z.row(r).maxCoeff();
      Eigen::Array<Scalar, 1, Eigen::Dynamic> e = (z.row(r).array() - m).exp();
      const Scalar sum = e.sum();
      probs.row(r) = (e / sum).matrix();
      if (active[static_cast<std::size_t>(r)]) {
        const int t = targets[static_cast<std::size_t>(r)];
        if (t < 0 || t >= z.cols()) throw std::runtime_error("cross entropy target out of range");
        loss -= std::log(probs(r, t));
      }
    }
    loss /= Scalar(n_active);
    Mat out(1, 1);
    out(0, 0) = loss;
    Var node = make(std::move(out), logits);
    nodes_[node.id].backward = [this, logits, targets, active, probs, n_active, node] {
      if (!needs(logits)) return;
      const Scalar g = nodes_[node.id].grad(0, 0) / Scalar(n_active);
      Mat& gl = acc(logits);
      for (Eigen::Index r = 0; r < probs.rows(); ++r) {
        if (!active[static_cast<std::size_t>(r)]) continue;
        gl.row(r) += probs.row(r) * g;
        gl(r, targets[static_cast<std::size_t>(r)]) -= g;
      }
    };
    return node;
  }

  void backward(Var loss) {
    if (value(loss).rows() != 1 || value(loss).cols() != 1) {
      throw std::runtime_error("backward expects a scalar node");
    }
    zero_grad(loss.id);
    nodes_[loss.id].grad(0, 0) = Scalar(1);
    for (int i = loss.id; i >= 0; --i) {
      if (nodes_[i].backward && nodes_[i].grad.size() != 0) nodes_[i].backward();
    }
  }

 private:
  struct Node {
    Mat value;
    mutable Mat grad;  // lazily zero-initialized
    std::function<void()> backward;
    bool needs_grad = false;
  };

  Var make(Mat v, Var a, Var b = Var{}, Var c = Var{}) {
    bool ng = nodes_[a.id].needs_grad;
    if (b.valid()) ng = ng || nodes_[b.id].needs_grad;
    if (c.valid()) ng = ng || nodes_[c.id].needs_grad;
    nodes_.push_back(Node{std::move(v), Mat(), nullptr, ng});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  Var make(Mat v, const std::vector<Var>& parents) {
    bool ng = false;
    for (Var p : parents) ng = ng || nodes_[p.id].needs_grad;
    nodes_.push_back(Node{std::move(v), Mat(), nullptr, ng});
    return Var{static_cast<int>(nodes_.size()) - 1};
  }

  bool needs(Var v) const { return nodes_[v.id].needs_grad; }

  void zero_grad(int id) const {
    nodes_[id].grad = Mat::Zero(nodes_[id].value.rows(), nodes_[id].value.cols());
  }

  Mat& acc(Var v) {
    if (nodes_[v.id].grad.size() == 0) zero_grad(v.id);
    return nodes_[v.id].grad;
  }

  std::vector<Node> nodes_;
};

}  // namespace adaptgen
