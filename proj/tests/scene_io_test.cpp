#include <gtest/gtest.h>
TEST(Placeholder, scene_io) { SUCCEED(); }
