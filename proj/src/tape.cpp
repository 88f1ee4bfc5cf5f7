#include "eqg/tape.hpp"

#include <cmath>
#include <stdexcept>

namespace eqg {

Tape::Id Tape::push(Tensor val, std::function<void(Tape&)> back) {
  Node n;
  n.grad = Tensor(val.rows, val.cols);
  n.val = std::move(val);
  n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size()) - 1;
}

Tape::Id Tape::leaf(const Tensor& value) { return push(value, nullptr); }
Tape::Id Tape::constant(const Tensor& value) { return push(value, nullptr); }

Tape::Id Tape::matmul(Id a, Id b) {
  Tensor y = eqg::matmul(value(a), value(b));
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    const Tensor& g = t.grad(out);
    Tensor ga = matmul_nt(g, t.value(b));
    Tensor gb = matmul_tn(t.value(a), g);
    for (size_t i = 0; i < ga.size(); ++i) t.grad_mut(a).v[i] += ga.v[i];
    for (size_t i = 0; i < gb.size(); ++i) t.grad_mut(b).v[i] += gb.v[i];
  };
  return out;
}

Tape::Id Tape::spmm(const SparseCsr* s, Id x) {
  Tensor y = eqg::spmm(*s, value(x));
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [s, x, out](Tape& t) {
    Tensor gx = spmm_t(*s, t.grad(out));
    for (size_t i = 0; i < gx.size(); ++i) t.grad_mut(x).v[i] += gx.v[i];
  };
  return out;
}

Tape::Id Tape::add(Id a, Id b) {
  check_same_shape(value(a), value(b), "add");
  Tensor y = value(a);
  for (size_t i = 0; i < y.size(); ++i) y.v[i] += value(b).v[i];
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i) {
      t.grad_mut(a).v[i] += t.grad(out).v[i];
      t.grad_mut(b).v[i] += t.grad(out).v[i];
    }
  };
  return out;
}

Tape::Id Tape::sub(Id a, Id b) {
  check_same_shape(value(a), value(b), "sub");
  Tensor y = value(a);
  for (size_t i = 0; i < y.size(); ++i) y.v[i] -= value(b).v[i];
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i) {
      t.grad_mut(a).v[i] += t.grad(out).v[i];
      t.grad_mut(b).v[i] -= t.grad(out).v[i];
    }
  };
  return out;
}

Tape::Id Tape::mul(Id a, Id b) {
  check_same_shape(value(a), value(b), "mul");
  Tensor y = value(a);
  for (size_t i = 0; i < y.size(); ++i) y.v[i] *= value(b).v[i];
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i) {
      t.grad_mut(a).v[i] += t.grad(out).v[i] * t.value(b).v[i];
      t.grad_mut(b).v[i] += t.grad(out).v[i] * t.value(a).v[i];
    }
  };
  return out;
}

Tape::Id Tape::div(Id a, Id b) {
  check_same_shape(value(a), value(b), "div");
  Tensor y = value(a);
  for (size_t i = 0; i < y.size(); ++i) y.v[i] /= value(b).v[i];
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, b, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i) {
      const double bi = t.value(b).v[i];
      t.grad_mut(a).v[i] += t.grad(out).v[i] / bi;
      t.grad_mut(b).v[i] -= t.grad(out).v[i] * t.value(a).v[i] / (bi * bi);
    }
  };
  return out;
}

Tape::Id Tape::add_row(Id a, Id bias) {
  const Tensor& av = value(a);
  const Tensor& bv = value(bias);
  if (bv.rows != 1 || bv.cols != av.cols)
    throw std::invalid_argument("add_row: bias shape " + bv.shape_str() +
                                " incompatible with " + av.shape_str());
  Tensor y = av;
  for (int r = 0; r < y.rows; ++r)
    for (int c = 0; c < y.cols; ++c) y.at(r, c) += bv.at(0, c);
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, bias, out](Tape& t) {
    const Tensor& g = t.grad(out);
    for (size_t i = 0; i < g.size(); ++i) t.grad_mut(a).v[i] += g.v[i];
    for (int r = 0; r < g.rows; ++r)
      for (int c = 0; c < g.cols; ++c) t.grad_mut(bias).at(0, c) += g.at(r, c);
  };
  return out;
}

Tape::Id Tape::relu(Id a) {
  Tensor y = value(a);
  for (double& x : y.v) x = x > 0.0 ? x : 0.0;
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i)
      if (t.value(a).v[i] > 0.0) t.grad_mut(a).v[i] += t.grad(out).v[i];
  };
  return out;
}

Tape::Id Tape::sigmoid(Id a) {
  Tensor y = value(a);
  for (double& x : y.v) x = 1.0 / (1.0 + std::exp(-x));
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i) {
      const double s = t.value(out).v[i];
      t.grad_mut(a).v[i] += t.grad(out).v[i] * s * (1.0 - s);
    }
  };
  return out;
}

Tape::Id Tape::softmax_rows(Id a) {
  Tensor y = value(a);
  for (int r = 0; r < y.rows; ++r) {
    double mx = y.at(r, 0);
    for (int c = 1; c < y.cols; ++c) mx = std::max(mx, y.at(r, c));
    double z = 0.0;
    for (int c = 0; c < y.cols; ++c) {
      y.at(r, c) = std::exp(y.at(r, c) - mx);
      z += y.at(r, c);
    }
    for (int c = 0; c < y.cols; ++c) y.at(r, c) /= z;
  }
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    const Tensor& g = t.grad(out);
    const Tensor& p = t.value(out);
    for (int r = 0; r < g.rows; ++r) {
      double dot = 0.0;
      for (int c = 0; c < g.cols; ++c) dot += g.at(r, c) * p.at(r, c);
      for (int c = 0; c < g.cols; ++c)
        t.grad_mut(a).at(r, c) += p.at(r, c) * (g.at(r, c) - dot);
    }
  };
  return out;
}

Tape::Id Tape::concat_cols(const std::vector<Id>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
  const int rows = value(parts[0]).rows;
  int cols = 0;
  for (Id p : parts) {
    if (value(p).rows != rows)
      throw std::invalid_argument("concat_cols: row mismatch");
    cols += value(p).cols;
  }
  Tensor y(rows, cols);
  int off = 0;
  for (Id p : parts) {
    const Tensor& pv = value(p);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < pv.cols; ++c) y.at(r, off + c) = pv.at(r, c);
    off += pv.cols;
  }
  Id out = push(std::move(y), nullptr);
  std::vector<Id> ps = parts;
  nodes_[out].back = [ps, out](Tape& t) {
    const Tensor& g = t.grad(out);
    int off2 = 0;
    for (Id p : ps) {
      Tensor& gp = t.grad_mut(p);
      for (int r = 0; r < g.rows; ++r)
        for (int c = 0; c < gp.cols; ++c) gp.at(r, c) += g.at(r, off2 + c);
      off2 += gp.cols;
    }
  };
  return out;
}

Tape::Id Tape::scale(Id a, double c) {
  Tensor y = value(a);
  for (double& x : y.v) x *= c;
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, c, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i)
      t.grad_mut(a).v[i] += c * t.grad(out).v[i];
  };
  return out;
}

Tape::Id Tape::add_const(Id a, double c) {
  Tensor y = value(a);
  for (double& x : y.v) x += c;
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i)
      t.grad_mut(a).v[i] += t.grad(out).v[i];
  };
  return out;
}

Tape::Id Tape::square(Id a) {
  Tensor y = value(a);
  for (double& x : y.v) x *= x;
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i)
      t.grad_mut(a).v[i] += 2.0 * t.value(a).v[i] * t.grad(out).v[i];
  };
  return out;
}

Tape::Id Tape::sqrt_op(Id a) {
  Tensor y = value(a);
  for (double& x : y.v) x = std::sqrt(x);
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    for (size_t i = 0; i < t.grad(out).size(); ++i)
      t.grad_mut(a).v[i] += t.grad(out).v[i] / (2.0 * t.value(out).v[i]);
  };
  return out;
}

Tape::Id Tape::sum(Id a) {
  Tensor y(1, 1);
  for (double x : value(a).v) y.v[0] += x;
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, out](Tape& t) {
    const double g = t.grad(out).v[0];
    for (double& x : t.grad_mut(a).v) x += g;
  };
  return out;
}

Tape::Id Tape::masked_mean(Id a, const std::vector<int>& rows) {
  if (rows.empty()) throw std::invalid_argument("masked_mean: empty row set");
  Tensor y(1, 1);
  for (int r : rows) y.v[0] += value(a).at(r, 0);
  y.v[0] /= static_cast<double>(rows.size());
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, rows, out](Tape& t) {
    const double g = t.grad(out).v[0] / static_cast<double>(rows.size());
    for (int r : rows) t.grad_mut(a).at(r, 0) += g;
  };
  return out;
}

Tape::Id Tape::masked_var(Id a, const std::vector<int>& rows) {
  if (rows.empty()) throw std::invalid_argument("masked_var: empty row set");
  const double n = static_cast<double>(rows.size());
  double m = 0.0;
  for (int r : rows) m += value(a).at(r, 0);
  m /= n;
  Tensor y(1, 1);
  for (int r : rows) {
    const double d = value(a).at(r, 0) - m;
    y.v[0] += d * d;
  }
  y.v[0] /= n;
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [a, rows, m, n, out](Tape& t) {
    const double g = t.grad(out).v[0];
    for (int r : rows)
      t.grad_mut(a).at(r, 0) += g * 2.0 * (t.value(a).at(r, 0) - m) / n;
  };
  return out;
}

Tape::Id Tape::cce_masked(Id logits, const std::vector<int>& labels,
                          const std::vector<int>& rows) {
  if (rows.empty()) throw std::invalid_argument("cce_masked: empty row set");
  const Tensor& lg = value(logits);
  const int k = lg.cols;
  for (int r : rows)
    if (labels[r] < 0 || labels[r] >= k)
      throw std::invalid_argument("cce_masked: label " + std::to_string(labels[r]) +
                                  " outside {0.." + std::to_string(k - 1) + "}");
  Tensor y(1, 1);
  for (int r : rows) {
    double mx = lg.at(r, 0);
    for (int c = 1; c < k; ++c) mx = std::max(mx, lg.at(r, c));
    double z = 0.0;
    for (int c = 0; c < k; ++c) z += std::exp(lg.at(r, c) - mx);
    y.v[0] += std::log(z) + mx - lg.at(r, labels[r]);
  }
  y.v[0] /= static_cast<double>(rows.size());
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [logits, labels, rows, k, out](Tape& t) {
    const double g = t.grad(out).v[0] / static_cast<double>(rows.size());
    const Tensor& lg2 = t.value(logits);
    for (int r : rows) {
      double mx = lg2.at(r, 0);
      for (int c = 1; c < k; ++c) mx = std::max(mx, lg2.at(r, c));
      double z = 0.0;
      for (int c = 0; c < k; ++c) z += std::exp(lg2.at(r, c) - mx);
      for (int c = 0; c < k; ++c) {
        const double p = std::exp(lg2.at(r, c) - mx) / z;
        t.grad_mut(logits).at(r, c) += g * (p - (labels[r] == c ? 1.0 : 0.0));
      }
    }
  };
  return out;
}

Tape::Id Tape::bce_masked(Id probs, const std::vector<double>& targets,
                          const std::vector<int>& rows) {
  if (rows.empty()) throw std::invalid_argument("bce_masked: empty row set");
  Tensor y(1, 1);
  for (int r : rows) {
    const double p =
        std::min(1.0 - kProbClamp, std::max(kProbClamp, value(probs).at(r, 0)));
    const double tr = targets[r];
    y.v[0] -= tr * std::log(p) + (1.0 - tr) * std::log(1.0 - p);
  }
  y.v[0] /= static_cast<double>(rows.size());
  Id out = push(std::move(y), nullptr);
  nodes_[out].back = [probs, targets, rows, out](Tape& t) {
    const double g = t.grad(out).v[0] / static_cast<double>(rows.size());
    for (int r : rows) {
      const double p0 = t.value(probs).at(r, 0);
      if (p0 <= kProbClamp || p0 >= 1.0 - kProbClamp) continue;  // clamp is flat
      t.grad_mut(probs).at(r, 0) += g * (-targets[r] / p0 + (1.0 - targets[r]) / (1.0 - p0));
    }
  };
  return out;
}

Tape::Id Tape::cov_cols(Id probs, const std::vector<double>& attr,
                        const std::vector<int>& rows) {
  if (rows.empty()) throw std::invalid_argument("cov_cols: empty row set");
  const Tensor& p = value(probs);
  const double n = static_cast<double>(rows.size());
  double abar = 0.0;
  for (int r : rows) abar += attr[r];
  abar /= n;
  Tensor y(1, p.cols);
  std::vector<double> pbar(p.cols, 0.0);
  for (int r : rows)
    for (int c = 0; c < p.cols; ++c) pbar[c] += p.at(r, c);
  for (double& x : pbar) x /= n;
  for (int r : rows)
    for (int c = 0; c < p.cols; ++c)
      y.at(0, c) += (p.at(r, c) - pbar[c]) * (attr[r] - abar) / n;
  Id out = push(std::move(y), nullptr);
  // d cov_c / d p_rc = (attr_r - abar)/n; the centered-mean term vanishes.
  nodes_[out].back = [probs, attr, rows, abar, n, out](Tape& t) {
    const Tensor& g = t.grad(out);
    for (int r : rows)
      for (int c = 0; c < g.cols; ++c)
        t.grad_mut(probs).at(r, c) += g.at(0, c) * (attr[r] - abar) / n;
  };
  return out;
}

void Tape::backward(Id scalar) {
  const Tensor& s = value(scalar);
  if (s.rows != 1 || s.cols != 1)
    throw std::invalid_argument("backward: root is not a scalar (" + s.shape_str() + ")");
  grad_mut(scalar).v[0] = 1.0;
  for (Id i = scalar; i >= 0; --i)
    if (nodes_[i].back) nodes_[i].back(*this);
}

}  // namespace eqg
