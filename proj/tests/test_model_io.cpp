#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cstring>

using namespace mgcmn;
using namespace mgcmn::testing;

namespace {

Model sample_model() {
    ModelConfig c;
    c.h1 = 2;
    c.h2 = 1;
    c.hidden_dim = 3;
    c.seed = 5;
    return build_model(c, 4, 2, SparseMatrix::identity(6));
}

}  // namespace

TEST(ModelFile, RoundTripIsExact) {
    const auto m = sample_model();
    const auto bytes = serialize_model(m, "seed = 5\n");
    const auto file = deserialize_model(bytes);
    EXPECT_EQ(file.config_text, "seed = 5\n");
    ASSERT_EQ(file.layers.size(), 3u);
    for (std::size_t k = 0; k < 3; ++k) {
        EXPECT_EQ(file.layers[k].role, m.layers[k].role);
        EXPECT_EQ(file.layers[k].activation, m.layers[k].activation);
        EXPECT_EQ(file.layers[k].params.w, m.layers[k].params.w);
    }
}

TEST(ModelFile, LayoutIsLittleEndianWithFixedHeader) {
    const auto m = sample_model();
    const auto bytes = serialize_model(m, "ab");
    ASSERT_GE(bytes.size(), 22u);
    EXPECT_EQ(std::memcmp(bytes.data(), "MGCMNMDL", 8), 0);
    EXPECT_EQ(bytes[8], 1);  // version, u32 LE
    EXPECT_EQ(bytes[9] | bytes[10] | bytes[11], 0);
    EXPECT_EQ(bytes[12], 2);  // config length
    EXPECT_EQ(bytes[16], 'a');
    EXPECT_EQ(bytes[18], 3);  // layer count
    // First layer header: role gcn (0), activation relu (1), reserved, rows 4, cols 3.
    EXPECT_EQ(bytes[22], 0);
    EXPECT_EQ(bytes[23], 1);
    EXPECT_EQ(bytes[26], 4);
    EXPECT_EQ(bytes[34], 3);
    double first = 0.0;
    std::memcpy(&first, bytes.data() + 42, 8);
    EXPECT_EQ(first, m.layers[0].params.w(0, 0));
    const std::size_t expected_size = 8 + 4 + 4 + 2 + 4 + 3 * 20 + 8 * (4 * 3 + 3 * 3 + 3 * 2);
    EXPECT_EQ(bytes.size(), expected_size);
}

TEST(ModelFile, RejectsCorruptInput) {
    const auto bytes = serialize_model(sample_model(), "cfg");
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(deserialize_model(bad), ModelFormatError);
    bad = bytes;
    bad[8] = 2;
    EXPECT_THROW(deserialize_model(bad), ModelFormatError);
    bad = bytes;
    bad.resize(bytes.size() - 1);
    EXPECT_THROW(deserialize_model(bad), ModelFormatError);
    bad = bytes;
    bad.push_back(0);
    EXPECT_THROW(deserialize_model(bad), ModelFormatError);
    bad = bytes;
    bad[8 + 4 + 4 + 3 + 4 + 1] = 9;  // activation of layer 0
    EXPECT_THROW(deserialize_model(bad), ModelFormatError);
    bad = bytes;
    bad[8 + 4 + 4 + 3 + 4 + 2] = 1;  // reserved field
    EXPECT_THROW(deserialize_model(bad), ModelFormatError);
    EXPECT_THROW(deserialize_model({}), ModelFormatError);
}

TEST(ModelFile, SaveAndLoad) {
    const auto dir = scratch_dir("model_io");
    const auto m = sample_model();
    save_model(dir / "m.bin", m, "x = 1\n");
    const auto file = load_model(dir / "m.bin");
    EXPECT_EQ(file.layers.back().params.w, m.layers.back().params.w);
    EXPECT_THROW(load_model(dir / "missing.bin"), ModelFormatError);
}
