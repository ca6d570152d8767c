#ifndef LCSMD_DATASET_HPP
#define LCSMD_DATASET_HPP

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <vector>

namespace lcsmd {

class empty_after_deletion : public std::runtime_error {
public:
    empty_after_deletion() : std::runtime_error("no rows survive test-wise deletion") {}
};

class insufficient_data : public std::runtime_error {
public:
    explicit insufficient_data(const std::string& what) : std::runtime_error(what) {}
};

// Sample matrix plus missingness mask. Masked cells are poisoned with NaN at
// construction so no statistic can read them unnoticed.
class Dataset {
public:
    Dataset(Eigen::MatrixXd values, std::vector<std::uint8_t> mask, std::vector<std::string> columns);

    int n() const { return static_cast<int>(values_.rows()); }
    int d() const { return static_cast<int>(values_.cols()); }
    const Eigen::MatrixXd& values() const { return values_; }
    const std::vector<std::string>& columns() const { return columns_; }
    int column_index(const std::string& name) const;

    bool missing(int row, int col) const { return mask_[static_cast<std::size_t>(row) * d() + col] != 0; }
    const std::vector<std::uint8_t>& mask() const { return mask_; }
    bool column_has_missing(int col) const;
    // columns with at least one missing entry, ascending
    std::vector<int> partially_observed_columns() const;

    double value(int row, int col) const { return values_(row, col); }

private:
    Eigen::MatrixXd values_;
    std::vector<std::uint8_t> mask_;
    std::vector<std::string> columns_;
};

// rows where every column in cols is observed
std::vector<int> observed_rows(const Dataset& d, const std::vector<int>& cols);

// throws empty_after_deletion when nothing survives
Dataset testwise_delete(const Dataset& d, const std::vector<int>& cols);

Eigen::VectorXd extract_column(const Dataset& d, int col, const std::vector<int>& rows);
// 1.0 where the column is missing, 0.0 otherwise
Eigen::VectorXd extract_indicator(const Dataset& d, int col, const std::vector<int>& rows);

} // namespace lcsmd

#endif
