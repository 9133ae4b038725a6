#include <catch2/catch_amalgamated.hpp>

TEST_CASE("placeholder", "[c1][c2][c3][c4][c5][c6][c7]") { SUCCEED(); }
