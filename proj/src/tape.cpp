#include "eventqa/tape.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace eventqa {

const Mat& Var::val() const { return tape_->value_of(*this); }

double Var::item() const {
  const Mat& m = val();
  assert(m.rows == 1 && m.cols == 1);
  return m.a[0];
}

Var Tape::make(Mat val, std::function<void()> back) {
  nodes_.push_back(Node{std::move(val), Mat(), std::move(back), nullptr});
  Node& n = nodes_.back();
  n.grad = Mat(n.val.rows, n.val.cols);
  return Var(this, static_cast<int>(nodes_.size()) - 1);
}

Mat& Tape::grad_mut(int id) { return nodes_[static_cast<size_t>(id)].grad; }

const Mat& Tape::value_of(Var v) const { return nodes_[static_cast<size_t>(v.id())].val; }
const Mat& Tape::grad_of(Var v) const { return nodes_[static_cast<size_t>(v.id())].grad; }

Var Tape::input(Mat value) { return make(std::move(value)); }

Var Tape::leaf(Param& p) {
  Var v = make(p.value);
  nodes_.back().bound = &p;
  return v;
}

void Tape::backward(Var scalar_loss) {
  assert(scalar_loss.tape() == this);
  const Mat& lv = value_of(scalar_loss);
  if (lv.rows != 1 || lv.cols != 1) {
    throw std::invalid_argument("backward expects a 1x1 loss node");
  }
  grad_mut(scalar_loss.id()).a[0] = 1.0;
  for (int i = scalar_loss.id(); i >= 0; --i) {
    Node& n = nodes_[static_cast<size_t>(i)];
    if (n.back) n.back();
  }
  for (Node& n : nodes_) {
    if (n.bound) {
      assert(n.bound->grad.same_shape(n.grad));
      for (int k = 0; k < n.grad.size(); ++k) n.bound->grad.a[k] += n.grad.a[k];
    }
  }
}

Var Tape::add(Var a, Var b) {
  assert(a.val().same_shape(b.val()));
  Mat out = a.val();
  for (int k = 0; k < out.size(); ++k) out.a[k] += b.val().a[k];
  int ia = a.id(), ib = b.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ib, ir] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    Mat& gb = grad_mut(ib);
    for (int k = 0; k < g.size(); ++k) {
      ga.a[k] += g.a[k];
      gb.a[k] += g.a[k];
    }
  };
  return r;
}

Var Tape::sub(Var a, Var b) {
  assert(a.val().same_shape(b.val()));
  Mat out = a.val();
  for (int k = 0; k < out.size(); ++k) out.a[k] -= b.val().a[k];
  int ia = a.id(), ib = b.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ib, ir] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    Mat& gb = grad_mut(ib);
    for (int k = 0; k < g.size(); ++k) {
      ga.a[k] += g.a[k];
      gb.a[k] -= g.a[k];
    }
  };
  return r;
}

Var Tape::hadamard(Var a, Var b) {
  assert(a.val().same_shape(b.val()));
  Mat out = a.val();
  for (int k = 0; k < out.size(); ++k) out.a[k] *= b.val().a[k];
  int ia = a.id(), ib = b.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ib, ir] {
    const Mat& g = grad_mut(ir);
    const Mat& av = nodes_[static_cast<size_t>(ia)].val;
    const Mat& bv = nodes_[static_cast<size_t>(ib)].val;
    Mat& ga = grad_mut(ia);
    Mat& gb = grad_mut(ib);
    for (int k = 0; k < g.size(); ++k) {
      ga.a[k] += g.a[k] * bv.a[k];
      gb.a[k] += g.a[k] * av.a[k];
    }
  };
  return r;
}

Var Tape::matmul(Var a, Var b) {
  Mat out;
  matmul_into(a.val(), b.val(), out);
  int ia = a.id(), ib = b.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ib, ir] {
    const Mat& g = grad_mut(ir);
    const Mat& av = nodes_[static_cast<size_t>(ia)].val;
    const Mat& bv = nodes_[static_cast<size_t>(ib)].val;
    // dA += G * B^T ; dB += A^T * G
    Mat& ga = grad_mut(ia);
    for (int i = 0; i < av.rows; ++i)
      for (int k = 0; k < av.cols; ++k) {
        double s = 0.0;
        for (int j = 0; j < bv.cols; ++j) s += g.at(i, j) * bv.at(k, j);
        ga.at(i, k) += s;
      }
    Mat& gb = grad_mut(ib);
    for (int k = 0; k < bv.rows; ++k)
      for (int j = 0; j < bv.cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < av.rows; ++i) s += av.at(i, k) * g.at(i, j);
        gb.at(k, j) += s;
      }
  };
  return r;
}

Var Tape::transpose(Var a) {
  Mat out = eventqa::transpose(a.val());
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) ga.at(j, i) += g.at(i, j);
  };
  return r;
}

Var Tape::scale(Var a, double s) {
  Mat out = a.val();
  for (double& x : out.a) x *= s;
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir, s] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    for (int k = 0; k < g.size(); ++k) ga.a[k] += s * g.a[k];
  };
  return r;
}

Var Tape::add_scalar(Var a, double c) {
  Mat out = a.val();
  for (double& x : out.a) x += c;
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    for (int k = 0; k < g.size(); ++k) ga.a[k] += g.a[k];
  };
  return r;
}

Var Tape::add_const(Var a, const Mat& c) {
  assert(a.val().same_shape(c));
  Mat out = a.val();
  for (int k = 0; k < out.size(); ++k) out.a[k] += c.a[k];
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    for (int k = 0; k < g.size(); ++k) ga.a[k] += g.a[k];
  };
  return r;
}

Var Tape::add_rowvec(Var a, Var v) {
  const Mat& av = a.val();
  const Mat& vv = v.val();
  assert(vv.rows == 1 && vv.cols == av.cols);
  Mat out = av;
  for (int i = 0; i < out.rows; ++i)
    for (int j = 0; j < out.cols; ++j) out.at(i, j) += vv.at(0, j);
  int ia = a.id(), iv = v.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, iv, ir] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    Mat& gv = grad_mut(iv);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) {
        ga.at(i, j) += g.at(i, j);
        gv.at(0, j) += g.at(i, j);
      }
  };
  return r;
}

Var Tape::sigmoid(Var a) {
  Mat out = a.val();
  for (double& x : out.a) x = 1.0 / (1.0 + std::exp(-x));
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    const Mat& g = grad_mut(ir);
    const Mat& y = nodes_[static_cast<size_t>(ir)].val;
    Mat& ga = grad_mut(ia);
    for (int k = 0; k < g.size(); ++k) ga.a[k] += g.a[k] * y.a[k] * (1.0 - y.a[k]);
  };
  return r;
}

Var Tape::tanh_op(Var a) {
  Mat out = a.val();
  for (double& x : out.a) x = std::tanh(x);
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    const Mat& g = grad_mut(ir);
    const Mat& y = nodes_[static_cast<size_t>(ir)].val;
    Mat& ga = grad_mut(ia);
    for (int k = 0; k < g.size(); ++k) ga.a[k] += g.a[k] * (1.0 - y.a[k] * y.a[k]);
  };
  return r;
}

Var Tape::log_op(Var a) {
  Mat out = a.val();
  for (double& x : out.a) x = std::log(x < 1e-300 ? 1e-300 : x);
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    const Mat& g = grad_mut(ir);
    const Mat& xv = nodes_[static_cast<size_t>(ia)].val;
    Mat& ga = grad_mut(ia);
    for (int k = 0; k < g.size(); ++k) {
      double x = xv.a[k] < 1e-300 ? 1e-300 : xv.a[k];
      ga.a[k] += g.a[k] / x;
    }
  };
  return r;
}

Var Tape::square(Var a) {
  Mat out = a.val();
  for (double& x : out.a) x *= x;
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    const Mat& g = grad_mut(ir);
    const Mat& xv = nodes_[static_cast<size_t>(ia)].val;
    Mat& ga = grad_mut(ia);
    for (int k = 0; k < g.size(); ++k) ga.a[k] += 2.0 * xv.a[k] * g.a[k];
  };
  return r;
}

Var Tape::min_const(Var a, double c) {
  Mat out = a.val();
  for (double& x : out.a) x = x < c ? x : c;
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir, c] {
    const Mat& g = grad_mut(ir);
    const Mat& xv = nodes_[static_cast<size_t>(ia)].val;
    Mat& ga = grad_mut(ia);
    for (int k = 0; k < g.size(); ++k)
      if (xv.a[k] < c) ga.a[k] += g.a[k];
  };
  return r;
}

Var Tape::softmax_rows(Var a) {
  Mat out = a.val();
  for (int i = 0; i < out.rows; ++i) {
    double mx = out.at(i, 0);
    for (int j = 1; j < out.cols; ++j) mx = std::max(mx, out.at(i, j));
    double sum = 0.0;
    for (int j = 0; j < out.cols; ++j) {
      double e = std::exp(out.at(i, j) - mx);
      out.at(i, j) = e;
      sum += e;
    }
    for (int j = 0; j < out.cols; ++j) out.at(i, j) /= sum;
  }
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    const Mat& g = grad_mut(ir);
    const Mat& y = nodes_[static_cast<size_t>(ir)].val;
    Mat& ga = grad_mut(ia);
    for (int i = 0; i < g.rows; ++i) {
      double dot = 0.0;
      for (int j = 0; j < g.cols; ++j) dot += g.at(i, j) * y.at(i, j);
      for (int j = 0; j < g.cols; ++j) ga.at(i, j) += y.at(i, j) * (g.at(i, j) - dot);
    }
  };
  return r;
}

Var Tape::slice_rows(Var a, int r0, int r1) {
  const Mat& av = a.val();
  assert(0 <= r0 && r0 < r1 && r1 <= av.rows);
  Mat out(r1 - r0, av.cols);
  for (int i = r0; i < r1; ++i)
    for (int j = 0; j < av.cols; ++j) out.at(i - r0, j) = av.at(i, j);
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir, r0] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) ga.at(i + r0, j) += g.at(i, j);
  };
  return r;
}

Var Tape::slice_cols(Var a, int c0, int c1) {
  const Mat& av = a.val();
  assert(0 <= c0 && c0 < c1 && c1 <= av.cols);
  Mat out(av.rows, c1 - c0);
  for (int i = 0; i < av.rows; ++i)
    for (int j = c0; j < c1; ++j) out.at(i, j - c0) = av.at(i, j);
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir, c0] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) ga.at(i, j + c0) += g.at(i, j);
  };
  return r;
}

Var Tape::concat_rows(const std::vector<Var>& parts) {
  assert(!parts.empty());
  int cols = parts[0].val().cols;
  int rows = 0;
  for (const Var& p : parts) {
    assert(p.val().cols == cols);
    rows += p.val().rows;
  }
  Mat out(rows, cols);
  std::vector<int> ids;
  std::vector<int> offsets;
  int off = 0;
  for (const Var& p : parts) {
    const Mat& pv = p.val();
    for (int i = 0; i < pv.rows; ++i)
      for (int j = 0; j < cols; ++j) out.at(off + i, j) = pv.at(i, j);
    ids.push_back(p.id());
    offsets.push_back(off);
    off += pv.rows;
  }
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ids, offsets, ir] {
    const Mat& g = grad_mut(ir);
    for (size_t p = 0; p < ids.size(); ++p) {
      Mat& gp = grad_mut(ids[p]);
      for (int i = 0; i < gp.rows; ++i)
        for (int j = 0; j < gp.cols; ++j) gp.at(i, j) += g.at(offsets[p] + i, j);
    }
  };
  return r;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  assert(!parts.empty());
  int rows = parts[0].val().rows;
  int cols = 0;
  for (const Var& p : parts) {
    assert(p.val().rows == rows);
    cols += p.val().cols;
  }
  Mat out(rows, cols);
  std::vector<int> ids;
  std::vector<int> offsets;
  int off = 0;
  for (const Var& p : parts) {
    const Mat& pv = p.val();
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < pv.cols; ++j) out.at(i, off + j) = pv.at(i, j);
    ids.push_back(p.id());
    offsets.push_back(off);
    off += pv.cols;
  }
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ids, offsets, ir] {
    const Mat& g = grad_mut(ir);
    for (size_t p = 0; p < ids.size(); ++p) {
      Mat& gp = grad_mut(ids[p]);
      for (int i = 0; i < gp.rows; ++i)
        for (int j = 0; j < gp.cols; ++j) gp.at(i, j) += g.at(i, offsets[p] + j);
    }
  };
  return r;
}

Var Tape::gather_rows(Var table, std::vector<int> ids) {
  const Mat& tv = table.val();
  Mat out(static_cast<int>(ids.size()), tv.cols);
  for (size_t i = 0; i < ids.size(); ++i) {
    assert(ids[i] >= 0 && ids[i] < tv.rows);
    for (int j = 0; j < tv.cols; ++j) out.at(static_cast<int>(i), j) = tv.at(ids[i], j);
  }
  int it = table.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, it, ir, ids = std::move(ids)] {
    const Mat& g = grad_mut(ir);
    Mat& gt = grad_mut(it);
    for (size_t i = 0; i < ids.size(); ++i)
      for (int j = 0; j < g.cols; ++j) gt.at(ids[i], j) += g.at(static_cast<int>(i), j);
  };
  return r;
}

Var Tape::repeat_row(Var a, int n) {
  const Mat& av = a.val();
  assert(av.rows == 1);
  Mat out(n, av.cols);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < av.cols; ++j) out.at(i, j) = av.at(0, j);
  int ia = a.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < g.cols; ++j) ga.at(0, j) += g.at(i, j);
  };
  return r;
}

Var Tape::mean_rows(Var a) {
  const Mat& av = a.val();
  Mat out(1, av.cols);
  for (int j = 0; j < av.cols; ++j) {
    double s = 0.0;
    for (int i = 0; i < av.rows; ++i) s += av.at(i, j);
    out.at(0, j) = s / av.rows;
  }
  int ia = a.id();
  int nr = av.rows;
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir, nr] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < g.cols; ++j) ga.at(i, j) += g.at(0, j) / nr;
  };
  return r;
}

Var Tape::mean_cols(Var a) {
  const Mat& av = a.val();
  Mat out(av.rows, 1);
  for (int i = 0; i < av.rows; ++i) {
    double s = 0.0;
    for (int j = 0; j < av.cols; ++j) s += av.at(i, j);
    out.at(i, 0) = s / av.cols;
  }
  int ia = a.id();
  int nc = av.cols;
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir, nc] {
    const Mat& g = grad_mut(ir);
    Mat& ga = grad_mut(ia);
    for (int i = 0; i < g.rows; ++i)
      for (int j = 0; j < nc; ++j) ga.at(i, j) += g.at(i, 0) / nc;
  };
  return r;
}

Var Tape::sum_all(Var a) {
  double s = 0.0;
  for (double x : a.val().a) s += x;
  int ia = a.id();
  Var r = make(Mat::scalar(s));
  int ir = r.id();
  nodes_.back().back = [this, ia, ir] {
    double g = grad_mut(ir).a[0];
    Mat& ga = grad_mut(ia);
    for (double& x : ga.a) x += g;
  };
  return r;
}

Var Tape::mean_all(Var a) {
  int n = a.val().size();
  return scale(sum_all(a), 1.0 / n);
}

Var Tape::add_to_column(Var m, Var col, int c) {
  const Mat& mv = m.val();
  const Mat& cv = col.val();
  assert(cv.cols == 1 && cv.rows == mv.rows && c >= 0 && c < mv.cols);
  Mat out = mv;
  for (int i = 0; i < out.rows; ++i) out.at(i, c) += cv.at(i, 0);
  int im = m.id(), ic = col.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, im, ic, ir, c] {
    const Mat& g = grad_mut(ir);
    Mat& gm = grad_mut(im);
    Mat& gc = grad_mut(ic);
    for (int k = 0; k < g.size(); ++k) gm.a[k] += g.a[k];
    for (int i = 0; i < g.rows; ++i) gc.at(i, 0) += g.at(i, c);
  };
  return r;
}

Var Tape::weighted_entry_sum(Var m, std::vector<Entry> entries) {
  const Mat& mv = m.val();
  double s = 0.0;
  for (const Entry& e : entries) s += e.w * mv.at(e.row, e.col);
  int im = m.id();
  Var r = make(Mat::scalar(s));
  int ir = r.id();
  nodes_.back().back = [this, im, ir, entries = std::move(entries)] {
    double g = grad_mut(ir).a[0];
    Mat& gm = grad_mut(im);
    for (const Entry& e : entries) gm.at(e.row, e.col) += g * e.w;
  };
  return r;
}

Var Tape::layer_norm(Var x, Var gain, Var bias, double eps) {
  const Mat& xv = x.val();
  const Mat& gv = gain.val();
  const Mat& bv = bias.val();
  assert(gv.rows == 1 && gv.cols == xv.cols);
  assert(bv.rows == 1 && bv.cols == xv.cols);
  Mat out(xv.rows, xv.cols);
  std::vector<double> mu(static_cast<size_t>(xv.rows)), inv_sd(static_cast<size_t>(xv.rows));
  for (int i = 0; i < xv.rows; ++i) {
    double m = 0.0;
    for (int j = 0; j < xv.cols; ++j) m += xv.at(i, j);
    m /= xv.cols;
    double v = 0.0;
    for (int j = 0; j < xv.cols; ++j) {
      double d = xv.at(i, j) - m;
      v += d * d;
    }
    v /= xv.cols;
    mu[static_cast<size_t>(i)] = m;
    inv_sd[static_cast<size_t>(i)] = 1.0 / std::sqrt(v + eps);
    for (int j = 0; j < xv.cols; ++j)
      out.at(i, j) = gv.at(0, j) * (xv.at(i, j) - m) * inv_sd[static_cast<size_t>(i)] + bv.at(0, j);
  }
  int ix = x.id(), ig = gain.id(), ib = bias.id();
  Var r = make(std::move(out));
  int ir = r.id();
  nodes_.back().back = [this, ix, ig, ib, ir, mu = std::move(mu), inv_sd = std::move(inv_sd)] {
    const Mat& g = grad_mut(ir);
    const Mat& xv = nodes_[static_cast<size_t>(ix)].val;
    const Mat& gv = nodes_[static_cast<size_t>(ig)].val;
    Mat& gx = grad_mut(ix);
    Mat& gg = grad_mut(ig);
    Mat& gb = grad_mut(ib);
    int C = xv.cols;
    for (int i = 0; i < xv.rows; ++i) {
      double isd = inv_sd[static_cast<size_t>(i)];
      double m = mu[static_cast<size_t>(i)];
      // dL/dxhat_j = g_j * gain_j ; xhat_j = (x_j - mu) * isd
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
      for (int j = 0; j < C; ++j) {
        double xhat = (xv.at(i, j) - m) * isd;
        double dxhat = g.at(i, j) * gv.at(0, j);
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat;
        gg.at(0, j) += g.at(i, j) * xhat;
        gb.at(0, j) += g.at(i, j);
      }
      for (int j = 0; j < C; ++j) {
        double xhat = (xv.at(i, j) - m) * isd;
        double dxhat = g.at(i, j) * gv.at(0, j);
        gx.at(i, j) += isd * (dxhat - sum_dxhat / C - xhat * sum_dxhat_xhat / C);
      }
    }
  };
  return r;
}

Var average(Tape& t, const std::vector<Var>& vs) {
  assert(!vs.empty());
  Var acc = vs[0];
  for (size_t i = 1; i < vs.size(); ++i) acc = t.add(acc, vs[i]);
  return t.scale(acc, 1.0 / static_cast<double>(vs.size()));
}

}  // namespace eventqa
