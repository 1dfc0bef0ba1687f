#include <gtest/gtest.h>
TEST(Placeholder, synth) { SUCCEED(); }
