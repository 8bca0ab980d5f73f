#include "cgs/arch_calc.hpp"

#include <algorithm>
#include <sstream>

#include "cgs/errors.hpp"

namespace cgs::arch {

namespace {

std::string shape3(long long a, long long b, long long c) {
    std::ostringstream os;
    os << "(" << a << "," << b << "," << c << ")";
    return os.str();
}

}  // namespace

ArchTable msfbcnn_table(const ArchInputs& in) {
    if (in.channels == 0 || in.time == 0 || in.f_t == 0 || in.f_s == 0 ||
        in.classes == 0) {
        throw ParameterError("arch-calc: all of C, T, F_T, F_S, N_C must be positive");
    }
    const long long C = static_cast<long long>(in.channels);
    const long long T = static_cast<long long>(in.time);
    const long long FT = static_cast<long long>(in.f_t);
    const long long FS = static_cast<long long>(in.f_s);
    const long long NC = static_cast<long long>(in.classes);
    const long long T15 = T / 15;

    ArchTable table;
    table.inputs = in;
    table.pool_divisible = (T % 15 == 0);

    std::ostringstream in_shape;
    in_shape << "(" << C << "," << T << ")";
    table.rows = {
        {"Input", "", "", "", "", 0, "(C,T)", in_shape.str(), "", ""},
        {"Reshape", "", "", "", "", 0, "(1,T,C)", shape3(1, T, C), "", ""},
        {"Timeconv1", "F_T", "(64,1)", "(1,1)", "64F_T", 64 * FT, "(F_T,T,C)",
         shape3(FT, T, C), "Linear", "Same"},
        {"Timeconv2", "F_T", "(40,1)", "(1,1)", "40F_T", 40 * FT, "(F_T,T,C)",
         shape3(FT, T, C), "Linear", "Same"},
        {"Timeconv3", "F_T", "(26,1)", "(1,1)", "26F_T", 26 * FT, "(F_T,T,C)",
         shape3(FT, T, C), "Linear", "Same"},
        {"Timeconv4", "F_T", "(16,1)", "(1,1)", "16F_T", 16 * FT, "(F_T,T,C)",
         shape3(FT, T, C), "Linear", "Same"},
        {"Concatenate", "", "", "", "", 0, "(4F_T,T,C)", shape3(4 * FT, T, C), "", ""},
        {"BatchNorm", "", "", "", "2F_T", 2 * FT, "(4F_T,T,C)", shape3(4 * FT, T, C),
         "", ""},
        {"Spatialconv", "F_S", "(1,C)", "(1,1)", "4CF_TF_S", 4 * C * FT * FS,
         "(F_S,T,1)", shape3(FS, T, 1), "Linear", "Valid"},
        {"BatchNorm", "", "", "", "2F_S", 2 * FS, "(F_S,T,1)", shape3(FS, T, 1), "", ""},
        {"Non-linear", "", "", "", "", 0, "(F_S,T,1)", shape3(FS, T, 1), "Square", ""},
        {"AveragePool", "", "(75,1)", "(15,1)", "", 0, "(F_S,T/15,1)",
         shape3(FS, T15, 1), "", "Valid"},
        {"Non-linear", "", "", "", "", 0, "(F_S,T/15,1)", shape3(FS, T15, 1), "Log", ""},
        {"Dropout", "", "", "", "", 0, "(F_S,T/15,1)", shape3(FS, T15, 1), "", ""},
        {"Dense", "N_C", "(T/15,1)", "(1,1)", "F_S(T/15)N_C", FS * T15 * NC, "N_C",
         std::to_string(NC), "Linear", "Valid"},
    };
    table.total_params = 0;
    for (const ArchRow& r : table.rows) table.total_params += r.params;
    return table;
}

std::string ArchTable::to_text() const {
    const std::vector<std::string> headers = {"Layer",  "Filters", "Kernel",
                                              "Stride", "Formula", "Params",
                                              "Output", "Shape",   "Activation",
                                              "Padding"};
    auto cell = [](const ArchRow& r, std::size_t col) -> std::string {
        switch (col) {
            case 0: return r.layer;
            case 1: return r.filters;
            case 2: return r.kernel;
            case 3: return r.stride;
            case 4: return r.formula;
            case 5: return r.formula.empty() ? "" : std::to_string(r.params);
            case 6: return r.output;
            case 7: return r.output_shape;
            case 8: return r.activation;
            default: return r.padding;
        }
    };
    std::vector<std::size_t> width(headers.size());
    for (std::size_t c = 0; c < headers.size(); ++c) {
        width[c] = headers[c].size();
        for (const ArchRow& r : rows) width[c] = std::max(width[c], cell(r, c).size());
    }
    std::ostringstream os;
    for (std::size_t c = 0; c < headers.size(); ++c) {
        os << headers[c] << std::string(width[c] - headers[c].size(), ' ')
           << (c + 1 < headers.size() ? "  " : "");
    }
    os << "\n";
    for (const ArchRow& r : rows) {
        for (std::size_t c = 0; c < headers.size(); ++c) {
            const std::string v = cell(r, c);
            os << v << std::string(width[c] - v.size(), ' ')
               << (c + 1 < headers.size() ? "  " : "");
        }
        os << "\n";
    }
    os << "Total params: " << total_params << "\n";
    if (!pool_divisible) {
        os << "Note: T=" << inputs.time
           << " is not divisible by 15; pooled length was floored to "
           << inputs.time / 15 << "\n";
    }
    return os.str();
}

nlohmann::ordered_json ArchTable::to_json() const {
    nlohmann::ordered_json j;
    j["inputs"] = {{"channels", inputs.channels},
                   {"time", inputs.time},
                   {"f_t", inputs.f_t},
                   {"f_s", inputs.f_s},
                   {"classes", inputs.classes}};
    nlohmann::ordered_json rws = nlohmann::ordered_json::array();
    for (const ArchRow& r : rows) {
        nlohmann::ordered_json row;
        row["layer"] = r.layer;
        row["filters"] = r.filters;
        row["kernel"] = r.kernel;
        row["stride"] = r.stride;
        row["formula"] = r.formula;
        row["params"] = r.params;
        row["output"] = r.output;
        row["output_shape"] = r.output_shape;
        row["activation"] = r.activation;
        row["padding"] = r.padding;
        rws.push_back(std::move(row));
    }
    j["rows"] = std::move(rws);
    j["total_params"] = total_params;
    j["pool_divisible"] = pool_divisible;
    return j;
}

}  // namespace cgs::arch
