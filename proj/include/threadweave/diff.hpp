#pragma once

#include <functional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "threadweave/tensor.hpp"

namespace tw {

// A learned tensor that outlives any single tape. The grad slot accumulates
// across backward passes until the optimizer consumes and zeroes it.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v) : name(std::move(n)), value(std::move(v)) {
    grad = Tensor(value.rows, value.cols);
  }

  void zero_grad() { std::fill(grad.a.begin(), grad.a.end(), 0.0); }
};

class Tape;

// Handle to one node on a tape. Cheap to copy; valid as long as the tape lives.
struct Value {
  Tape* tape = nullptr;
  int id = -1;

  const Tensor& val() const;
  int rows() const { return val().rows; }
  int cols() const { return val().cols; }
  double scalar() const;
};

// Dynamic reverse-mode tape. Rebuilt per training step (thread lengths vary);
// single-threaded by contract. Backward visits nodes in reverse creation
// order, which is a valid reverse topological order because every op only
// consumes already-created nodes.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Value constant(Tensor v);
  Value scalar(double v) { return constant(Tensor::scalar(v)); }

  // Leaf bound to a parameter; cached so each parameter appears once per tape
  // and multiple uses accumulate into one gradient.
  Value leaf(Parameter& p);

  // Accumulates d(loss)/d(node) into every node's grad slot and d(loss)/d(p)
  // into every reachable parameter's grad slot. Repeated calls accumulate.
  void backward(Value loss);

  const Tensor& value_of(Value v) const { return nodes_[v.id].val; }
  const Tensor& grad_of(Value v) const { return nodes_[v.id].grad_acc; }
  std::size_t node_count() const { return nodes_.size(); }

 private:
  friend Value detail_emit(Tape& t, Tensor val, std::vector<int> parents,
                           std::function<void(Tape&, std::vector<Tensor>&, int)> back,
                           const char* op_name);
  friend struct Value;

  struct Node {
    Tensor val;
    Tensor grad_acc;
    std::vector<int> parents;
    std::function<void(Tape&, std::vector<Tensor>&, int)> back;
    Parameter* source = nullptr;
  };

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_ids_;
};

// --- op suite -----------------------------------------------------------
// Each op records its backward rule on the tape and rejects shape mismatches
// and non-finite results.

Value add(Value a, Value b);
Value sub(Value a, Value b);
Value mul(Value a, Value b);              // Hadamard
Value smul(Value s, Value x);             // scalar node times tensor
Value scale(Value x, double c);           // constant scale
Value matmul(Value a, Value b);
Value tanh(Value x);
Value sigmoid(Value x);
Value exp(Value x);
Value log(Value x);
Value softmax(Value x);                   // column vector
Value log_softmax(Value x);               // column vector, numerically stable
Value concat_rows(std::span<const Value> parts);  // stack column vectors
Value concat_cols(std::span<const Value> parts);  // columns of a matrix
Value slice_rows(Value x, int offset, int len);
Value reshape(Value x, int rows, int cols);
Value mean(Value x);
Value sum(Value x);
Value embed_row(Value table, int row);    // matrix row as a column vector

}  // namespace tw
