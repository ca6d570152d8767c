#include <doctest.h>

#include "lcsmd/dataset.hpp"

#include <cmath>
#include <set>

using namespace lcsmd;

namespace {

Dataset small_dataset() {
    Eigen::MatrixXd v(4, 2);
    v << 1, 10, 2, 20, 3, 30, 4, 40;
    // column A missing in rows 1 and 3
    std::vector<std::uint8_t> mask = {0, 0, 1, 0, 0, 0, 1, 0};
    return Dataset(v, mask, {"A", "B"});
}

} // namespace

TEST_CASE("test-wise deletion basics") {
    Dataset d = small_dataset();
    Dataset kept = testwise_delete(d, {0});
    CHECK(kept.n() == 2);
    CHECK(kept.value(0, 0) == 1.0);
    CHECK(kept.value(1, 0) == 3.0);

    // all-false mask: identity on rows
    Eigen::MatrixXd v(3, 1);
    v << 1, 2, 3;
    Dataset full(v, {0, 0, 0}, {"A"});
    CHECK(testwise_delete(full, {0}).n() == 3);

    // nothing survives
    Eigen::MatrixXd w(2, 1);
    w << 1, 2;
    Dataset gone(w, {1, 1}, {"A"});
    CHECK_THROWS_AS(testwise_delete(gone, {0}), empty_after_deletion);

    CHECK_THROWS_AS(testwise_delete(d, {}), std::invalid_argument);
    CHECK_THROWS_AS(testwise_delete(d, {5}), std::invalid_argument);
}

TEST_CASE("deletion on a union equals intersection of deletions") {
    Eigen::MatrixXd v(8, 3);
    std::vector<std::uint8_t> mask(24, 0);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 3; ++c) {
            v(r, c) = r * 3 + c;
            mask[r * 3 + c] = ((r * 7 + c * 3) % 5 == 0) ? 1 : 0;
        }
    Dataset d(v, mask, {"A", "B", "C"});

    auto rows_union = observed_rows(d, {0, 1, 2});
    auto r1 = observed_rows(d, {0, 1});
    auto r2 = observed_rows(d, {1, 2});
    std::set<int> s1(r1.begin(), r1.end()), s2(r2.begin(), r2.end());
    std::vector<int> expect;
    for (int r : s1)
        if (s2.count(r)) expect.push_back(r);
    CHECK(rows_union == expect);
}

TEST_CASE("masked cells are poisoned") {
    Dataset d = small_dataset();
    CHECK(std::isnan(d.value(1, 0)));
    CHECK(std::isnan(d.value(3, 0)));
    CHECK(d.value(0, 0) == 1.0);
    CHECK(d.partially_observed_columns() == std::vector<int>{0});
}

TEST_CASE("dataset construction rejects bad shapes and names") {
    Eigen::MatrixXd v(2, 2);
    v.setZero();
    CHECK_THROWS_AS(Dataset(v, std::vector<std::uint8_t>(4, 0), {"A", "A"}), std::invalid_argument);
    CHECK_THROWS_AS(Dataset(v, std::vector<std::uint8_t>(3, 0), {"A", "B"}), std::invalid_argument);
}
