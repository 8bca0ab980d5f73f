#include <doctest.h>

#include <cgs/adam.hpp>
#include <cgs/errors.hpp>

using namespace cgs;
using ad::Adam;
using ad::Matrix;
using ad::Param;

TEST_CASE("bias-corrected first steps match hand computation") {
    // lr 0.1, g 2.0 repeated: w1 = 1 - 0.1*2/(2+1e-8), w2 likewise with
    // second-moment bias correction (values frozen from the closed form).
    Param w("w", Matrix::scalar(1.0));
    Adam opt;
    opt.add_group({&w}, 0.1);

    w.grad = Matrix::scalar(2.0);
    opt.step();
    CHECK(w.value.data[0] == doctest::Approx(0.90000000049999995).epsilon(1e-15));
    CHECK(opt.step_count() == 1);
    // step() consumed and cleared the gradient
    CHECK(w.grad.data[0] == 0.0);

    w.grad = Matrix::scalar(2.0);
    opt.step();
    CHECK(w.value.data[0] == doctest::Approx(0.80000000100000068).epsilon(1e-15));
    CHECK(opt.step_count() == 2);
}

TEST_CASE("the first step moves by about lr regardless of gradient scale") {
    // Bias correction makes m_hat = g and v_hat = g^2 on step one, so the
    // update is lr * sign(g) up to eps.
    for (double g : {1e-6, 1.0, 1e6}) {
        Param w("w", Matrix::scalar(0.0));
        Adam opt;
        opt.add_group({&w}, 0.01);
        w.grad = Matrix::scalar(g);
        opt.step();
        CHECK(w.value.data[0] == doctest::Approx(-0.01).epsilon(1e-2));
    }
}

TEST_CASE("per-group learning rates are independent") {
    Param a("a", Matrix::scalar(0.0));
    Param b("b", Matrix::scalar(0.0));
    Adam opt;
    opt.add_group({&a}, 0.1);
    opt.add_group({&b}, 0.001);
    a.grad = Matrix::scalar(1.0);
    b.grad = Matrix::scalar(1.0);
    opt.step();
    CHECK(a.value.data[0] == doctest::Approx(-0.1).epsilon(1e-6));
    CHECK(b.value.data[0] == doctest::Approx(-0.001).epsilon(1e-6));
}

TEST_CASE("zero gradient leaves the parameter in place") {
    Param w("w", Matrix::scalar(3.0));
    Adam opt;
    opt.add_group({&w}, 0.1);
    opt.step();
    CHECK(w.value.data[0] == 3.0);
}

TEST_CASE("stale gradient shape is reported with the parameter name") {
    Param w("select_logits", Matrix(2, 3));
    Adam opt;
    opt.add_group({&w}, 0.1);
    w.grad = Matrix(3, 2);
    try {
        opt.step();
        FAIL("expected ParameterError");
    } catch (const ParameterError& e) {
        CHECK(std::string(e.what()).find("select_logits") != std::string::npos);
    }
}

TEST_CASE("zero_grad clears all registered parameters") {
    Param a("a", Matrix::scalar(0.0));
    Param b("b", Matrix::scalar(0.0));
    Adam opt;
    opt.add_group({&a, &b}, 0.1);
    a.grad = Matrix::scalar(5.0);
    b.grad = Matrix::scalar(-2.0);
    opt.zero_grad();
    CHECK(a.grad.data[0] == 0.0);
    CHECK(b.grad.data[0] == 0.0);
}
