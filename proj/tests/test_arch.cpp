#include <doctest.h>

#include <string>
#include <vector>

#include <cgs/arch_calc.hpp>
#include <cgs/errors.hpp>

using namespace cgs;
using arch::ArchInputs;
using arch::ArchTable;

TEST_CASE("msfbcnn table lists the published layers in order") {
    ArchTable t = arch::msfbcnn_table(ArchInputs{});
    REQUIRE(t.rows.size() == 15);
    const std::vector<std::string> layers = {
        "Input",       "Reshape",    "Timeconv1",  "Timeconv2", "Timeconv3",
        "Timeconv4",   "Concatenate", "BatchNorm", "Spatialconv", "BatchNorm",
        "Non-linear",  "AveragePool", "Non-linear", "Dropout",   "Dense"};
    for (std::size_t i = 0; i < layers.size(); ++i) {
        CHECK(t.rows[i].layer == layers[i]);
    }
    const std::vector<std::string> formulas = {
        "", "", "64F_T", "40F_T", "26F_T", "16F_T", "", "2F_T",
        "4CF_TF_S", "2F_S", "", "", "", "", "F_S(T/15)N_C"};
    for (std::size_t i = 0; i < formulas.size(); ++i) {
        CHECK(t.rows[i].formula == formulas[i]);
    }
}

TEST_CASE("parameter counts at the published operating point") {
    // C=44, T=1125, F_T=F_S=10, N_C=4.
    ArchTable t = arch::msfbcnn_table(ArchInputs{});
    CHECK(t.inputs.channels == 44);
    CHECK(t.inputs.time == 1125);

    CHECK(t.rows[2].params == 640);     // 64*F_T
    CHECK(t.rows[3].params == 400);     // 40*F_T
    CHECK(t.rows[4].params == 260);
    CHECK(t.rows[5].params == 160);
    CHECK(t.rows[7].params == 20);      // 2*F_T
    CHECK(t.rows[8].params == 17600);   // 4*C*F_T*F_S
    CHECK(t.rows[9].params == 20);      // 2*F_S
    CHECK(t.rows[14].params == 3000);   // F_S*(T/15)*N_C = 10*75*4
    CHECK(t.total_params == 22100);
    CHECK(t.pool_divisible);            // 1125 = 75*15
}

TEST_CASE("shapes are evaluated alongside the symbols") {
    ArchTable t = arch::msfbcnn_table(ArchInputs{});
    CHECK(t.rows[0].output == "(C,T)");
    CHECK(t.rows[0].output_shape == "(44,1125)");
    CHECK(t.rows[1].output_shape == "(1,1125,44)");
    CHECK(t.rows[2].output == "(F_T,T,C)");
    CHECK(t.rows[2].output_shape == "(10,1125,44)");
    CHECK(t.rows[6].output == "(4F_T,T,C)");
    CHECK(t.rows[6].output_shape == "(40,1125,44)");
    CHECK(t.rows[8].output_shape == "(10,1125,1)");
    CHECK(t.rows[11].output == "(F_S,T/15,1)");
    CHECK(t.rows[11].output_shape == "(10,75,1)");
    CHECK(t.rows[14].output_shape == "4");

    CHECK(t.rows[2].kernel == "(64,1)");
    CHECK(t.rows[8].kernel == "(1,C)");
    CHECK(t.rows[11].kernel == "(75,1)");
    CHECK(t.rows[11].stride == "(15,1)");
    CHECK(t.rows[10].activation == "Square");
    CHECK(t.rows[12].activation == "Log");
    CHECK(t.rows[8].padding == "Valid");
    CHECK(t.rows[2].padding == "Same");
}

TEST_CASE("counts scale with the inputs") {
    ArchInputs in;
    in.channels = 20;
    in.time = 300;
    in.f_t = 5;
    in.f_s = 3;
    in.classes = 2;
    ArchTable t = arch::msfbcnn_table(in);
    CHECK(t.rows[2].params == 320);               // 64*5
    CHECK(t.rows[8].params == 4 * 20 * 5 * 3);    // 1200
    CHECK(t.rows[14].params == 3 * 20 * 2);       // F_S*(300/15)*N_C = 120
    CHECK(t.total_params == 320 + 200 + 130 + 80 + 10 + 1200 + 6 + 120);
    CHECK(t.pool_divisible);
}

TEST_CASE("non-divisible windows floor the pooled length and say so") {
    ArchInputs in;
    in.time = 100;  // 100/15 floors to 6
    ArchTable t = arch::msfbcnn_table(in);
    CHECK_FALSE(t.pool_divisible);
    CHECK(t.rows[11].output_shape == "(10,6,1)");
    CHECK(t.rows[14].params == 10 * 6 * 4);
    const std::string text = t.to_text();
    CHECK(text.find("not divisible by 15") != std::string::npos);
    CHECK(text.find("floored to 6") != std::string::npos);
}

TEST_CASE("table renders text and json consistently") {
    ArchTable t = arch::msfbcnn_table(ArchInputs{});
    const std::string text = t.to_text();
    CHECK(text.find("Timeconv1") != std::string::npos);
    CHECK(text.find("17600") != std::string::npos);
    CHECK(text.find("Total params: 22100") != std::string::npos);

    const auto j = t.to_json();
    CHECK(j.at("total_params") == 22100);
    CHECK(j.at("pool_divisible") == true);
    REQUIRE(j.at("rows").size() == 15);
    CHECK(j.at("rows")[8].at("formula") == "4CF_TF_S");
    CHECK(j.at("rows")[8].at("params") == 17600);
    CHECK(j.at("inputs").at("channels") == 44);
}

TEST_CASE("zero inputs are rejected") {
    ArchInputs in;
    in.f_t = 0;
    CHECK_THROWS_AS((void)arch::msfbcnn_table(in), ParameterError);
    in = ArchInputs{};
    in.channels = 0;
    CHECK_THROWS_AS((void)arch::msfbcnn_table(in), ParameterError);
}
