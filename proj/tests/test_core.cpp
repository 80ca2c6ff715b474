#include <cmath>
#include <limits>

#include "doctest.h"
#include "pga/types.hpp"

using namespace pga;

TEST_CASE("validate_dataset: duplicates, empties, bad values") {
    Dataset empty;
    CHECK(validate_dataset(empty).clean());

    Dataset data;
    data.push_back({"a", 0, {1, 2}});
    data.push_back({"a", 0, {3, 4}});  // duplicate (supplier, epoch)
    data.push_back({"b", 0, {}});      // empty series
    data.push_back({"c", 1, {1, std::numeric_limits<double>::quiet_NaN()}});
    data.push_back({"d", 2, {1, std::numeric_limits<double>::infinity()}});

    ValidationReport report = validate_dataset(data);
    CHECK_FALSE(report.clean());
    REQUIRE(report.duplicates.size() == 1);
    CHECK(report.duplicates[0].supplier == "a");
    REQUIRE(report.empty_series.size() == 1);
    CHECK(report.empty_series[0].supplier == "b");
    CHECK(report.bad_values.size() == 2);
}

TEST_CASE("is_valid_partition") {
    std::vector<SupplierId> suppliers{"a", "b", "c", "d"};

    GroupPartition good{0, {{"a", "c"}, {"d", "b"}}};
    CHECK(is_valid_partition(good, suppliers));

    GroupPartition overlapping{0, {{"a", "c"}, {"c", "b", "d"}}};
    CHECK_FALSE(is_valid_partition(overlapping, suppliers));

    GroupPartition incomplete{0, {{"a", "c"}, {"b"}}};
    CHECK_FALSE(is_valid_partition(incomplete, suppliers));

    GroupPartition with_empty{0, {{"a", "b", "c", "d"}, {}}};
    CHECK_FALSE(is_valid_partition(with_empty, suppliers));

    GroupPartition foreign{0, {{"a", "b"}, {"c", "x"}}};
    CHECK_FALSE(is_valid_partition(foreign, suppliers));
}
