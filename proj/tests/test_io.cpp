#include <sstream>
#include <gtest/gtest.h>
#include <gls/io.hpp>

using namespace gls;

TEST(Io, MatrixRoundTripIsExact)
{
    Matrix m(2, 3);
    m << 0.1, -1e-300, 3.0, 1.0 / 3.0, 2e10, -0.0;
    std::stringstream buf;
    io::write_matrix(buf, m);
    EXPECT_EQ(io::read_matrix(buf), m);
}

TEST(Io, VectorAndGroups)
{
    std::stringstream vbuf("1.5\n\n-2\r\n 3 \n");
    const Vector v = io::read_vector(vbuf);
    ASSERT_EQ(v.size(), 3);
    EXPECT_EQ(v(2), 3.0);
    std::stringstream gbuf("2, 3,1\n");
    const auto groups = io::read_groups(gbuf);
    EXPECT_EQ(groups, GroupPartition({2, 3, 1}));
    std::stringstream out;
    io::write_groups(out, groups);
    EXPECT_EQ(out.str(), "2,3,1\n");
}

TEST(Io, CoefficientsRoundTrip)
{
    const Coefficients beta((Vector(3) << 0.25, -1.0, 0.0).finished(), GroupPartition({2, 1}));
    std::stringstream buf;
    io::write_coefficients(buf, beta);
    EXPECT_EQ(buf.str(), "group,index,value\n1,1,0.25\n1,2,-1\n2,1,0\n");
    const auto back = io::read_coefficients(buf);
    EXPECT_EQ(back.values(), beta.values());
    EXPECT_EQ(back.groups(), beta.groups());
}

TEST(Io, MalformedInput)
{
    std::stringstream ragged("1,2\n3\n");
    EXPECT_THROW(io::read_matrix(ragged), io::MalformedInput);
    std::stringstream text("1,x\n");
    EXPECT_THROW(io::read_matrix(text), io::MalformedInput);
    std::stringstream nan("nan\n");
    EXPECT_THROW(io::read_vector(nan), io::MalformedInput);
    std::stringstream wide("1,2\n");
    EXPECT_THROW(io::read_vector(wide), io::MalformedInput);
    std::stringstream empty("");
    EXPECT_THROW(io::read_matrix(empty), io::MalformedInput);
    for (const char* bad : {"0,2\n", "2,-1\n", "1.5\n", "a\n", "\n"}) {
        std::stringstream g(bad);
        EXPECT_THROW(io::read_groups(g), InvalidInput) << bad;
    }
    std::stringstream header("g,i,v\n");
    EXPECT_THROW(io::read_coefficients(header), io::MalformedInput);
    std::stringstream order("group,index,value\n1,2,0\n");
    EXPECT_THROW(io::read_coefficients(order), io::MalformedInput);
    EXPECT_THROW(io::open_input("/nonexistent/file.csv"), io::MalformedInput);
}
