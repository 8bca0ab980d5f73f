#ifndef CGS_TENSOR_HPP
#define CGS_TENSOR_HPP

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

namespace cgs::ad {

// Dense row-major matrix of doubles. Vectors are 1xN, scalars 1x1.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    std::size_t size() const { return data.size(); }
    bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

    static Matrix row_vector(const std::vector<double>& v) {
        Matrix m(1, v.size());
        m.data = v;
        return m;
    }
    static Matrix scalar(double v) {
        Matrix m(1, 1);
        m.data[0] = v;
        return m;
    }
};

// Persistent learnable parameter. Lives outside any tape; forward passes bind
// it onto a tape with Tape::param() and backward() accumulates into grad.
struct Param {
    std::string name;
    Matrix value;
    Matrix grad;

    Param() = default;
    Param(std::string n, Matrix v) : name(std::move(n)), value(v), grad(v.rows, v.cols) {}

    void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

class Tape;

// Lightweight handle into a tape node. Valid until the owning tape is cleared.
class Tensor {
public:
    Tensor() = default;

    const Matrix& value() const;
    std::size_t rows() const { return value().rows; }
    std::size_t cols() const { return value().cols; }
    bool requires_grad() const;
    // Gradient of the last backward() pass, or nullptr for non-grad nodes.
    const Matrix* grad() const;

private:
    friend class Tape;
    Tensor(Tape* t, std::size_t id) : tape_(t), id_(id) {}
    Tape* tape_ = nullptr;
    std::size_t id_ = 0;
};

// Append-only record of primitive operations. Nodes are created in dependency
// order, so reverse iteration is a valid topological order for backward().
// Not shareable across threads; each training run owns its own tape.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    // --- leaves ---
    Tensor constant(Matrix m);
    Tensor variable(Matrix m);     // grad-tracked leaf without a Param binding
    Tensor param(Param& p);        // grad-tracked leaf; backward() adds into p.grad

    // --- primitives ---
    Tensor matmul(Tensor a, Tensor b);
    Tensor add(Tensor a, Tensor b);               // same shape
    Tensor add_rowvec(Tensor a, Tensor bias);     // bias is 1xC, added to every row
    Tensor mul(Tensor a, Tensor b);               // elementwise
    Tensor scale(Tensor a, double c);
    Tensor exp(Tensor a);
    Tensor log(Tensor a);
    Tensor tanh(Tensor a);
    // Temperature softmax over each row, stabilized by per-row max subtraction.
    Tensor softmax_rows(Tensor a, double tau);
    Tensor mean_axis0(Tensor a);                  // RxC -> 1xC
    Tensor sum(Tensor a);                         // -> scalar
    // Mean cross-entropy of row logits against integer labels, via
    // max-stabilized log-sum-exp. Returns a scalar.
    Tensor cross_entropy_with_logits(Tensor logits, const std::vector<int>& labels);
    Tensor row(Tensor a, std::size_t r);          // copy of row r as 1xC
    Tensor stack_rows(const std::vector<Tensor>& rows);
    Tensor reshape(Tensor a, std::size_t r, std::size_t c);

    // Reverse pass from a scalar loss. Populates node grads and accumulates
    // into bound Params. May be called once per forward build.
    void backward(Tensor loss);

    // Drop all nodes, keeping allocated capacity for reuse.
    void clear();

    std::size_t node_count() const { return nodes_.size(); }

private:
    struct Node {
        Matrix value;
        Matrix grad;                 // allocated iff requires_grad
        bool requires_grad = false;
        Param* bound = nullptr;      // accumulate grad here after backward
        std::function<void()> backprop;  // empty for leaves
    };

    friend class Tensor;

    Node& node(std::size_t id) { return nodes_[id]; }
    const Node& node(std::size_t id) const { return nodes_[id]; }
    Tensor make_node(Matrix value, bool requires_grad);
    static void check_same_shape(const Matrix& a, const Matrix& b, const char* op);

    std::vector<Node> nodes_;
};

}  // namespace cgs::ad

#endif  // CGS_TENSOR_HPP
