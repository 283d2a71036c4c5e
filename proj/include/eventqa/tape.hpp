#ifndef EVENTQA_TAPE_HPP
#define EVENTQA_TAPE_HPP

#include <functional>
#include <string>
#include <vector>

#include "eventqa/mat.hpp"

namespace eventqa {

// Trainable tensor. Models own their parameters; a Tape binds them as leaves
// so gradients accumulate into `grad` across backward passes (the unit of
// gradient accumulation during training).
struct Param {
  std::string name;
  Mat value;
  Mat grad;
  Mat adam_m;
  Mat adam_v;
  bool decay = true;  // excluded for normalization-layer parameters

  Param() = default;
  Param(std::string n, Mat v, bool d = true)
      : name(std::move(n)), value(std::move(v)), decay(d) {
    grad = Mat(value.rows, value.cols);
    adam_m = Mat(value.rows, value.cols);
    adam_v = Mat(value.rows, value.cols);
  }
};

class Tape;

// Handle to a node on a Tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;
  const Mat& val() const;
  int rows() const { return val().rows; }
  int cols() const { return val().cols; }
  double item() const;  // value of a 1x1 node
  int id() const { return id_; }
  Tape* tape() const { return tape_; }
  explicit operator bool() const { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* t, int id) : tape_(t), id_(id) {}
  Tape* tape_ = nullptr;
  int id_ = -1;
};

// Reverse-mode autodiff over a build-order tape. One tape per forward pass;
// nodes are alive until the tape is destroyed.
class Tape {
 public:
  Var input(Mat value);
  Var leaf(Param& p);

  // Seeds d(loss)/d(loss)=1, sweeps the tape in reverse creation order and
  // adds leaf gradients into their bound Params.
  void backward(Var scalar_loss);

  const Mat& value_of(Var v) const;
  const Mat& grad_of(Var v) const;  // valid after backward()

  // ---- primitive ops ----
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var scale(Var a, double s);
  Var add_scalar(Var a, double c);
  Var add_const(Var a, const Mat& c);
  Var add_rowvec(Var a, Var v);           // v is 1xC, broadcast over rows
  Var sigmoid(Var a);
  Var tanh_op(Var a);
  Var log_op(Var a);                      // input clamped to >= 1e-300
  Var square(Var a);
  Var min_const(Var a, double c);         // elementwise min(a, c)
  Var softmax_rows(Var a);
  Var slice_rows(Var a, int r0, int r1);  // half-open
  Var slice_cols(Var a, int c0, int c1);
  Var concat_rows(const std::vector<Var>& parts);
  Var concat_cols(const std::vector<Var>& parts);
  Var gather_rows(Var table, std::vector<int> ids);
  Var repeat_row(Var a, int n);           // a is 1xC -> nxC
  Var mean_rows(Var a);                   // RxC -> 1xC
  Var mean_cols(Var a);                   // RxC -> Rx1
  Var sum_all(Var a);                     // -> 1x1
  Var mean_all(Var a);                    // -> 1x1
  Var add_to_column(Var m, Var col, int c);
  // sum of w*m(r,c) over entries -> 1x1
  struct Entry {
    int row;
    int col;
    double w;
  };
  Var weighted_entry_sum(Var m, std::vector<Entry> entries);
  Var layer_norm(Var x, Var gain, Var bias, double eps = 1e-5);

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Mat val;
    Mat grad;
    std::function<void()> back;  // empty for leaves/inputs
    Param* bound = nullptr;
  };

  Var make(Mat val, std::function<void()> back = nullptr);
  Mat& grad_mut(int id);
  std::vector<Node> nodes_;
};

// Mean of 1x1 vars; convenience for loss composition.
Var average(Tape& t, const std::vector<Var>& vs);

}  // namespace eventqa

#endif  // EVENTQA_TAPE_HPP
