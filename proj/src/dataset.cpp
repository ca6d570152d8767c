#include "lcsmd/dataset.hpp"

#include <limits>
#include <set>

namespace lcsmd {

Dataset::Dataset(Eigen::MatrixXd values, std::vector<std::uint8_t> mask, std::vector<std::string> columns)
    : values_(std::move(values)), mask_(std::move(mask)), columns_(std::move(columns)) {
    if (values_.rows() < 1 || values_.cols() < 1)
        throw std::invalid_argument("dataset needs at least one row and one column");
    if (static_cast<int>(columns_.size()) != values_.cols())
        throw std::invalid_argument("column name count does not match data");
    if (mask_.size() != static_cast<std::size_t>(values_.rows()) * static_cast<std::size_t>(values_.cols()))
        throw std::invalid_argument("mask shape does not match data");
    std::set<std::string> seen(columns_.begin(), columns_.end());
    if (seen.size() != columns_.size()) throw std::invalid_argument("duplicate column names");
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (int r = 0; r < n(); ++r)
        for (int c = 0; c < d(); ++c)
            if (missing(r, c)) values_(r, c) = nan;
}

int Dataset::column_index(const std::string& name) const {
    for (int c = 0; c < d(); ++c)
        if (columns_[c] == name) return c;
    throw std::invalid_argument("unknown column: " + name);
}

bool Dataset::column_has_missing(int col) const {
    for (int r = 0; r < n(); ++r)
        if (missing(r, col)) return true;
    return false;
}

std::vector<int> Dataset::partially_observed_columns() const {
    std::vector<int> out;
    for (int c = 0; c < d(); ++c)
        if (column_has_missing(c)) out.push_back(c);
    return out;
}

std::vector<int> observed_rows(const Dataset& d, const std::vector<int>& cols) {
    std::vector<int> rows;
    rows.reserve(d.n());
    for (int r = 0; r < d.n(); ++r) {
        bool ok = true;
        for (int c : cols)
            if (d.missing(r, c)) { ok = false; break; }
        if (ok) rows.push_back(r);
    }
    return rows;
}

Dataset testwise_delete(const Dataset& d, const std::vector<int>& cols) {
    if (cols.empty()) throw std::invalid_argument("test-wise deletion needs at least one column");
    for (int c : cols)
        if (c < 0 || c >= d.d()) throw std::invalid_argument("column index out of range");
    std::vector<int> rows = observed_rows(d, cols);
    if (rows.empty()) throw empty_after_deletion();
    Eigen::MatrixXd values(rows.size(), d.d());
    std::vector<std::uint8_t> mask(rows.size() * d.d());
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (int c = 0; c < d.d(); ++c) {
            values(static_cast<int>(i), c) = d.value(rows[i], c);
            mask[i * d.d() + c] = d.missing(rows[i], c) ? 1 : 0;
        }
    return Dataset(values, mask, d.columns());
}

Eigen::VectorXd extract_column(const Dataset& d, int col, const std::vector<int>& rows) {
    Eigen::VectorXd v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v(static_cast<int>(i)) = d.value(rows[i], col);
    return v;
}

Eigen::VectorXd extract_indicator(const Dataset& d, int col, const std::vector<int>& rows) {
    Eigen::VectorXd v(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) v(static_cast<int>(i)) = d.missing(rows[i], col) ? 1.0 : 0.0;
    return v;
}

} // namespace lcsmd
