#include <gtest/gtest.h>

#include <sstream>

#include "tyshrink/csv.hpp"
#include "tyshrink/sampling.hpp"

using namespace tyshrink;

TEST(Csv, ReadsWithAndWithoutHeader) {
    std::istringstream a("1,2\n3, 4.5\n\n");
    const auto m = csv::read_matrix(a);
    ASSERT_EQ(m.rows(), 2);
    EXPECT_EQ(m(1, 1), 4.5);

    std::istringstream b("x,y\n1e-3,-2\n");
    const auto h = csv::read_matrix(b, true);
    ASSERT_EQ(h.rows(), 1);
    EXPECT_EQ(h(0, 0), 1e-3);
}

TEST(Csv, MalformedInputThrows) {
    std::istringstream ragged("1,2\n3\n");
    EXPECT_THROW(csv::read_matrix(ragged), csv::ParseError);
    std::istringstream text("1,abc\n");
    EXPECT_THROW(csv::read_matrix(text), csv::ParseError);
    std::istringstream empty("");
    EXPECT_THROW(csv::read_matrix(empty), csv::ParseError);
    std::istringstream header_only("a,b\n");
    EXPECT_THROW(csv::read_matrix(header_only, true), csv::ParseError);
}

TEST(Csv, DoublesRoundTripExactly) {
    Rng rng({8, 8});
    Eigen::MatrixXd m(7, 5);
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.normal() * std::pow(10.0, 40.0 * (rng.uniform() - 0.5));
    std::stringstream io;
    csv::write_matrix(io, m);
    EXPECT_EQ(csv::read_matrix(io), m);
}

TEST(Csv, FormatsSpecialValues) {
    EXPECT_EQ(csv::format_real(0.5), "0.5");
    EXPECT_EQ(csv::format_real(1.0), "1");
    EXPECT_EQ(csv::format_real(std::nan("")), "nan");
    EXPECT_EQ(csv::format_real(-1.0 / 0.0), "-inf");
}
