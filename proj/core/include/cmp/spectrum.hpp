#ifndef CMP_SPECTRUM_HPP
#define CMP_SPECTRUM_HPP

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace cmp {

/// Complex transmission over a (bias field, probe frequency) grid.
/// Rows follow the field axis, columns the frequency axis.
struct SpectrumMap {
    std::vector<double> field_axis;      // Tesla, strictly increasing
    std::vector<double> frequency_axis;  // rad/s, strictly increasing
    Eigen::MatrixXcd values;             // dimensionless transmission amplitude

    void validate() const;
};

}  // namespace cmp

#endif
