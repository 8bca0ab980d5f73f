#ifndef CGS_ARCH_CALC_HPP
#define CGS_ARCH_CALC_HPP

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace cgs::arch {

// Inputs of the MSFBCNN parameter calculator: EEG channel count C, window
// length T (samples), temporal/spatial filter counts F_T and F_S, classes N_C.
struct ArchInputs {
    std::size_t channels = 44;
    std::size_t time = 1125;
    std::size_t f_t = 10;
    std::size_t f_s = 10;
    std::size_t classes = 4;
};

struct ArchRow {
    std::string layer;
    std::string filters;   // symbolic, e.g. "F_T"
    std::string kernel;    // e.g. "(64,1)"
    std::string stride;
    std::string formula;   // parameter-count formula, e.g. "64F_T"
    long long params = 0;  // formula evaluated at the inputs
    std::string output;    // symbolic output shape, e.g. "(F_T,T,C)"
    std::string output_shape;  // evaluated, e.g. "(10,1125,44)"
    std::string activation;
    std::string padding;
};

struct ArchTable {
    ArchInputs inputs;
    std::vector<ArchRow> rows;
    long long total_params = 0;
    bool pool_divisible = true;  // T % 15 == 0; otherwise T/15 is floored

    std::string to_text() const;  // aligned human-readable table
    nlohmann::ordered_json to_json() const;
};

// The MSFBCNN layer table with parameter counts evaluated at the given
// inputs. Layer list, formulas and shapes follow the published architecture.
ArchTable msfbcnn_table(const ArchInputs& in);

}  // namespace cgs::arch

#endif  // CGS_ARCH_CALC_HPP
