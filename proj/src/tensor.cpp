#include "cgs/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "cgs/errors.hpp"

namespace cgs::ad {

namespace {

std::string shape_str(const Matrix& m) {
    return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

}  // namespace

const Matrix& Tensor::value() const { return tape_->node(id_).value; }

bool Tensor::requires_grad() const { return tape_->node(id_).requires_grad; }

const Matrix* Tensor::grad() const {
    const auto& n = tape_->node(id_);
    return n.requires_grad ? &n.grad : nullptr;
}

void Tape::check_same_shape(const Matrix& a, const Matrix& b, const char* op) {
    if (!a.same_shape(b)) {
        throw DimensionError(std::string(op) + ": shape mismatch " + shape_str(a) +
                             " vs " + shape_str(b));
    }
}

Tensor Tape::make_node(Matrix value, bool requires_grad) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = requires_grad;
    if (requires_grad) {
        n.grad = Matrix(n.value.rows, n.value.cols);
    }
    nodes_.push_back(std::move(n));
    return Tensor(this, nodes_.size() - 1);
}

Tensor Tape::constant(Matrix m) { return make_node(std::move(m), false); }

Tensor Tape::variable(Matrix m) { return make_node(std::move(m), true); }

Tensor Tape::param(Param& p) {
    Tensor t = make_node(p.value, true);
    node(t.id_).bound = &p;
    return t;
}

Tensor Tape::matmul(Tensor a, Tensor b) {
    const Matrix& av = node(a.id_).value;
    const Matrix& bv = node(b.id_).value;
    if (av.cols != bv.rows) {
        throw DimensionError("matmul: inner dimensions differ, " + shape_str(av) +
                             " * " + shape_str(bv));
    }
    Matrix out(av.rows, bv.cols);
    for (std::size_t i = 0; i < av.rows; ++i) {
        for (std::size_t k = 0; k < av.cols; ++k) {
            const double aik = av.at(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < bv.cols; ++j) {
                out.at(i, j) += aik * bv.at(k, j);
            }
        }
    }
    bool rg = node(a.id_).requires_grad || node(b.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, bi = b.id_, yi = y.id_;
        node(yi).backprop = [this, ai, bi, yi] {
            const Matrix& g = node(yi).grad;
            const Matrix& A = node(ai).value;
            const Matrix& B = node(bi).value;
            if (node(ai).requires_grad) {
                Matrix& ga = node(ai).grad;  // dA += g * B^T
                for (std::size_t i = 0; i < A.rows; ++i)
                    for (std::size_t j = 0; j < g.cols; ++j) {
                        const double gij = g.at(i, j);
                        if (gij == 0.0) continue;
                        for (std::size_t k = 0; k < A.cols; ++k)
                            ga.at(i, k) += gij * B.at(k, j);
                    }
            }
            if (node(bi).requires_grad) {
                Matrix& gb = node(bi).grad;  // dB += A^T * g
                for (std::size_t i = 0; i < A.rows; ++i)
                    for (std::size_t k = 0; k < A.cols; ++k) {
                        const double aik = A.at(i, k);
                        if (aik == 0.0) continue;
                        for (std::size_t j = 0; j < g.cols; ++j)
                            gb.at(k, j) += aik * g.at(i, j);
                    }
            }
        };
    }
    return y;
}

Tensor Tape::add(Tensor a, Tensor b) {
    const Matrix& av = node(a.id_).value;
    const Matrix& bv = node(b.id_).value;
    check_same_shape(av, bv, "add");
    Matrix out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += bv.data[i];
    bool rg = node(a.id_).requires_grad || node(b.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, bi = b.id_, yi = y.id_;
        node(yi).backprop = [this, ai, bi, yi] {
            const Matrix& g = node(yi).grad;
            if (node(ai).requires_grad) {
                Matrix& ga = node(ai).grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
            }
            if (node(bi).requires_grad) {
                Matrix& gb = node(bi).grad;
                for (std::size_t i = 0; i < g.size(); ++i) gb.data[i] += g.data[i];
            }
        };
    }
    return y;
}

Tensor Tape::add_rowvec(Tensor a, Tensor bias) {
    const Matrix& av = node(a.id_).value;
    const Matrix& bv = node(bias.id_).value;
    if (bv.rows != 1 || bv.cols != av.cols) {
        throw DimensionError("add_rowvec: bias must be 1x" + std::to_string(av.cols) +
                             ", got " + shape_str(bv));
    }
    Matrix out = av;
    for (std::size_t r = 0; r < out.rows; ++r)
        for (std::size_t c = 0; c < out.cols; ++c) out.at(r, c) += bv.at(0, c);
    bool rg = node(a.id_).requires_grad || node(bias.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, bi = bias.id_, yi = y.id_;
        node(yi).backprop = [this, ai, bi, yi] {
            const Matrix& g = node(yi).grad;
            if (node(ai).requires_grad) {
                Matrix& ga = node(ai).grad;
                for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
            }
            if (node(bi).requires_grad) {
                Matrix& gb = node(bi).grad;
                for (std::size_t r = 0; r < g.rows; ++r)
                    for (std::size_t c = 0; c < g.cols; ++c)
                        gb.at(0, c) += g.at(r, c);
            }
        };
    }
    return y;
}

Tensor Tape::mul(Tensor a, Tensor b) {
    const Matrix& av = node(a.id_).value;
    const Matrix& bv = node(b.id_).value;
    check_same_shape(av, bv, "mul");
    Matrix out = av;
    for (std::size_t i = 0; i < out.size(); ++i) out.data[i] *= bv.data[i];
    bool rg = node(a.id_).requires_grad || node(b.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, bi = b.id_, yi = y.id_;
        node(yi).backprop = [this, ai, bi, yi] {
            const Matrix& g = node(yi).grad;
            const Matrix& A = node(ai).value;
            const Matrix& B = node(bi).value;
            if (node(ai).requires_grad) {
                Matrix& ga = node(ai).grad;
                for (std::size_t i = 0; i < g.size(); ++i)
                    ga.data[i] += g.data[i] * B.data[i];
            }
            if (node(bi).requires_grad) {
                Matrix& gb = node(bi).grad;
                for (std::size_t i = 0; i < g.size(); ++i)
                    gb.data[i] += g.data[i] * A.data[i];
            }
        };
    }
    return y;
}

Tensor Tape::scale(Tensor a, double c) {
    Matrix out = node(a.id_).value;
    for (double& v : out.data) v *= c;
    bool rg = node(a.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, yi = y.id_;
        node(yi).backprop = [this, ai, yi, c] {
            const Matrix& g = node(yi).grad;
            Matrix& ga = node(ai).grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += c * g.data[i];
        };
    }
    return y;
}

Tensor Tape::exp(Tensor a) {
    Matrix out = node(a.id_).value;
    for (double& v : out.data) v = std::exp(v);
    bool rg = node(a.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, yi = y.id_;
        node(yi).backprop = [this, ai, yi] {
            const Matrix& g = node(yi).grad;
            const Matrix& Y = node(yi).value;
            Matrix& ga = node(ai).grad;
            for (std::size_t i = 0; i < g.size(); ++i)
                ga.data[i] += g.data[i] * Y.data[i];
        };
    }
    return y;
}

Tensor Tape::log(Tensor a) {
    Matrix out = node(a.id_).value;
    for (double& v : out.data) v = std::log(v);
    bool rg = node(a.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, yi = y.id_;
        node(yi).backprop = [this, ai, yi] {
            const Matrix& g = node(yi).grad;
            const Matrix& A = node(ai).value;
            Matrix& ga = node(ai).grad;
            for (std::size_t i = 0; i < g.size(); ++i)
                ga.data[i] += g.data[i] / A.data[i];
        };
    }
    return y;
}

Tensor Tape::tanh(Tensor a) {
    Matrix out = node(a.id_).value;
    for (double& v : out.data) v = std::tanh(v);
    bool rg = node(a.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, yi = y.id_;
        node(yi).backprop = [this, ai, yi] {
            const Matrix& g = node(yi).grad;
            const Matrix& Y = node(yi).value;
            Matrix& ga = node(ai).grad;
            for (std::size_t i = 0; i < g.size(); ++i)
                ga.data[i] += g.data[i] * (1.0 - Y.data[i] * Y.data[i]);
        };
    }
    return y;
}

Tensor Tape::softmax_rows(Tensor a, double tau) {
    if (!(tau > 0.0)) {
        throw ParameterError("softmax_rows: temperature must be positive, got " +
                             std::to_string(tau));
    }
    const Matrix& av = node(a.id_).value;
    Matrix out(av.rows, av.cols);
    for (std::size_t r = 0; r < av.rows; ++r) {
        double mx = av.at(r, 0);
        for (std::size_t c = 1; c < av.cols; ++c) mx = std::max(mx, av.at(r, c));
        double denom = 0.0;
        for (std::size_t c = 0; c < av.cols; ++c) {
            const double e = std::exp((av.at(r, c) - mx) / tau);
            out.at(r, c) = e;
            denom += e;
        }
        for (std::size_t c = 0; c < av.cols; ++c) out.at(r, c) /= denom;
    }
    bool rg = node(a.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, yi = y.id_;
        node(yi).backprop = [this, ai, yi, tau] {
            const Matrix& g = node(yi).grad;
            const Matrix& S = node(yi).value;
            Matrix& ga = node(ai).grad;
            // dL/da_j = (s_j / tau) * (g_j - sum_i g_i s_i) per row
            for (std::size_t r = 0; r < S.rows; ++r) {
                double dot = 0.0;
                for (std::size_t c = 0; c < S.cols; ++c)
                    dot += g.at(r, c) * S.at(r, c);
                for (std::size_t c = 0; c < S.cols; ++c)
                    ga.at(r, c) += S.at(r, c) / tau * (g.at(r, c) - dot);
            }
        };
    }
    return y;
}

Tensor Tape::mean_axis0(Tensor a) {
    const Matrix& av = node(a.id_).value;
    if (av.rows == 0) throw DimensionError("mean_axis0: empty input");
    Matrix out(1, av.cols);
    for (std::size_t r = 0; r < av.rows; ++r)
        for (std::size_t c = 0; c < av.cols; ++c) out.at(0, c) += av.at(r, c);
    for (double& v : out.data) v /= static_cast<double>(av.rows);
    bool rg = node(a.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, yi = y.id_;
        node(yi).backprop = [this, ai, yi] {
            const Matrix& g = node(yi).grad;
            Matrix& ga = node(ai).grad;
            const double inv = 1.0 / static_cast<double>(ga.rows);
            for (std::size_t r = 0; r < ga.rows; ++r)
                for (std::size_t c = 0; c < ga.cols; ++c)
                    ga.at(r, c) += g.at(0, c) * inv;
        };
    }
    return y;
}

Tensor Tape::sum(Tensor a) {
    const Matrix& av = node(a.id_).value;
    double total = 0.0;
    for (double v : av.data) total += v;
    bool rg = node(a.id_).requires_grad;
    Tensor y = make_node(Matrix::scalar(total), rg);
    if (rg) {
        std::size_t ai = a.id_, yi = y.id_;
        node(yi).backprop = [this, ai, yi] {
            const double g = node(yi).grad.data[0];
            Matrix& ga = node(ai).grad;
            for (double& v : ga.data) v += g;
        };
    }
    return y;
}

Tensor Tape::cross_entropy_with_logits(Tensor logits, const std::vector<int>& labels) {
    const Matrix& lv = node(logits.id_).value;
    if (labels.size() != lv.rows) {
        throw DimensionError("cross_entropy_with_logits: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(lv.rows) + " rows");
    }
    for (int lab : labels) {
        if (lab < 0 || static_cast<std::size_t>(lab) >= lv.cols) {
            throw ParameterError("cross_entropy_with_logits: label " + std::to_string(lab) +
                                 " outside [0, " + std::to_string(lv.cols) + ")");
        }
    }
    // Cache per-row softmax for the backward pass while computing the loss.
    Matrix probs(lv.rows, lv.cols);
    double loss = 0.0;
    for (std::size_t r = 0; r < lv.rows; ++r) {
        double mx = lv.at(r, 0);
        for (std::size_t c = 1; c < lv.cols; ++c) mx = std::max(mx, lv.at(r, c));
        double denom = 0.0;
        for (std::size_t c = 0; c < lv.cols; ++c) {
            const double e = std::exp(lv.at(r, c) - mx);
            probs.at(r, c) = e;
            denom += e;
        }
        for (std::size_t c = 0; c < lv.cols; ++c) probs.at(r, c) /= denom;
        const double lse = mx + std::log(denom);
        loss += lse - lv.at(r, static_cast<std::size_t>(labels[r]));
    }
    loss /= static_cast<double>(lv.rows);
    bool rg = node(logits.id_).requires_grad;
    Tensor y = make_node(Matrix::scalar(loss), rg);
    if (rg) {
        std::size_t li = logits.id_, yi = y.id_;
        node(yi).backprop = [this, li, yi, probs, labels] {
            const double g = node(yi).grad.data[0];
            Matrix& gl = node(li).grad;
            const double inv = 1.0 / static_cast<double>(probs.rows);
            for (std::size_t r = 0; r < probs.rows; ++r) {
                for (std::size_t c = 0; c < probs.cols; ++c) {
                    double d = probs.at(r, c);
                    if (c == static_cast<std::size_t>(labels[r])) d -= 1.0;
                    gl.at(r, c) += g * inv * d;
                }
            }
        };
    }
    return y;
}

Tensor Tape::row(Tensor a, std::size_t r) {
    const Matrix& av = node(a.id_).value;
    if (r >= av.rows) {
        throw DimensionError("row: index " + std::to_string(r) + " out of range for " +
                             shape_str(av));
    }
    Matrix out(1, av.cols);
    for (std::size_t c = 0; c < av.cols; ++c) out.at(0, c) = av.at(r, c);
    bool rg = node(a.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, yi = y.id_;
        node(yi).backprop = [this, ai, yi, r] {
            const Matrix& g = node(yi).grad;
            Matrix& ga = node(ai).grad;
            for (std::size_t c = 0; c < g.cols; ++c) ga.at(r, c) += g.at(0, c);
        };
    }
    return y;
}

Tensor Tape::stack_rows(const std::vector<Tensor>& rows) {
    if (rows.empty()) throw DimensionError("stack_rows: no rows given");
    const std::size_t cols = node(rows[0].id_).value.cols;
    for (const Tensor& t : rows) {
        const Matrix& v = node(t.id_).value;
        if (v.rows != 1 || v.cols != cols) {
            throw DimensionError("stack_rows: expected 1x" + std::to_string(cols) +
                                 " rows, got " + shape_str(v));
        }
    }
    Matrix out(rows.size(), cols);
    bool rg = false;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Matrix& v = node(rows[r].id_).value;
        for (std::size_t c = 0; c < cols; ++c) out.at(r, c) = v.at(0, c);
        rg = rg || node(rows[r].id_).requires_grad;
    }
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::vector<std::size_t> ids(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) ids[r] = rows[r].id_;
        std::size_t yi = y.id_;
        node(yi).backprop = [this, ids, yi] {
            const Matrix& g = node(yi).grad;
            for (std::size_t r = 0; r < ids.size(); ++r) {
                if (!node(ids[r]).requires_grad) continue;
                Matrix& gr = node(ids[r]).grad;
                for (std::size_t c = 0; c < g.cols; ++c) gr.at(0, c) += g.at(r, c);
            }
        };
    }
    return y;
}

Tensor Tape::reshape(Tensor a, std::size_t r, std::size_t c) {
    const Matrix& av = node(a.id_).value;
    if (r * c != av.size()) {
        throw DimensionError("reshape: cannot view " + shape_str(av) + " as " +
                             std::to_string(r) + "x" + std::to_string(c));
    }
    Matrix out(r, c);
    out.data = av.data;
    bool rg = node(a.id_).requires_grad;
    Tensor y = make_node(std::move(out), rg);
    if (rg) {
        std::size_t ai = a.id_, yi = y.id_;
        node(yi).backprop = [this, ai, yi] {
            const Matrix& g = node(yi).grad;
            Matrix& ga = node(ai).grad;
            for (std::size_t i = 0; i < g.size(); ++i) ga.data[i] += g.data[i];
        };
    }
    return y;
}

void Tape::backward(Tensor loss) {
    if (loss.tape_ != this) {
        throw ParameterError("backward: tensor does not belong to this tape");
    }
    Node& ln = node(loss.id_);
    if (ln.value.rows != 1 || ln.value.cols != 1) {
        throw DimensionError("backward: loss must be scalar, got " + shape_str(ln.value));
    }
    if (!ln.requires_grad) {
        throw ParameterError("backward: loss does not depend on any tracked tensor");
    }
    for (Node& n : nodes_) {
        if (n.requires_grad) std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
    }
    ln.grad.data[0] = 1.0;
    for (std::size_t i = loss.id_ + 1; i-- > 0;) {
        if (nodes_[i].backprop) nodes_[i].backprop();
    }
    for (Node& n : nodes_) {
        if (n.bound == nullptr) continue;
        Matrix& pg = n.bound->grad;
        for (std::size_t i = 0; i < n.grad.size(); ++i) pg.data[i] += n.grad.data[i];
    }
}

void Tape::clear() { nodes_.clear(); }

}  // namespace cgs::ad
