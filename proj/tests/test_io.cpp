#include <doctest.h>

#include <cstring>
#include <random>

#include "alref/core/error.hpp"
#include "alref/io/base64.hpp"
#include "alref/io/files.hpp"
#include "alref/io/hash.hpp"
#include "alref/io/jpeg.hpp"
#include "alref/io/png.hpp"
#include "alref/io/rle.hpp"
#include "alref/io/wav.hpp"
#include "testkit.hpp"

using namespace alref;

namespace {

Raster noise_raster(int w, int h, unsigned seed) {
  std::mt19937 rng(seed);
  Raster r(w, h);
  for (auto& b : r.rgb) b = static_cast<std::uint8_t>(rng());
  return r;
}

BinaryMask random_mask(std::mt19937& rng, int h, int w, double p) {
  std::bernoulli_distribution on(p);
  BinaryMask m(h, w);
  for (auto& b : m.bits) b = on(rng);
  return m;
}

// Minimal hand-built RIFF writer, independent of the library encoder.
std::vector<std::uint8_t> wav_bytes(int channels, int rate, int bits, int format, const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> out;
  auto u32 = [&](std::uint32_t v) { for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i))); };
  auto u16 = [&](std::uint16_t v) { for (int i = 0; i < 2; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i))); };
  auto tag = [&](const char* t) { out.insert(out.end(), t, t + 4); };
  tag("RIFF");
  u32(static_cast<std::uint32_t>(36 + data.size()));
  tag("WAVE");
  tag("fmt ");
  u32(16);
  u16(static_cast<std::uint16_t>(format));
  u16(static_cast<std::uint16_t>(channels));
  u32(static_cast<std::uint32_t>(rate));
  u32(static_cast<std::uint32_t>(rate * channels * bits / 8));
  u16(static_cast<std::uint16_t>(channels * bits / 8));
  u16(static_cast<std::uint16_t>(bits));
  tag("data");
  u32(static_cast<std::uint32_t>(data.size()));
  out.insert(out.end(), data.begin(), data.end());
  return out;
}

}  // namespace

TEST_CASE("sha256 known vectors") {
  CHECK(io::sha256_hex(std::string_view("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(io::sha256_hex(std::string_view("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("raster hash covers dimensions") {
  Raster a(2, 3, 7), b(3, 2, 7);
  CHECK(a.rgb == b.rgb);
  CHECK(io::raster_hash(a) != io::raster_hash(b));
  CHECK(io::raster_hash(a) == io::raster_hash(Raster(2, 3, 7)));
}

TEST_CASE("base64 known vectors") {
  auto enc = [](std::string s) {
    return io::base64_encode(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
  };
  CHECK(enc("") == "");
  CHECK(enc("f") == "Zg==");
  CHECK(enc("fo") == "Zm8=");
  CHECK(enc("foo") == "Zm9v");
  CHECK(enc("foobar") == "Zm9vYmFy");
  const auto d = io::base64_decode("Zm9vYmE=");
  CHECK(std::string(d.begin(), d.end()) == "fooba");
  CHECK_THROWS_AS(io::base64_decode("abc"), Error);
  CHECK_THROWS_AS(io::base64_decode("a$==" ), Error);
}

TEST_CASE("png round trip is lossless") {
  const auto r = noise_raster(17, 9, 5);
  CHECK(io::decode_png(io::encode_png(r)) == r);
  CHECK(io::decode_image(io::encode_png(r)) == r);
  const std::vector<std::uint8_t> junk{1, 2, 3, 4};
  CHECK_THROWS_AS(io::decode_png(junk), Error);
  CHECK_THROWS_AS(io::decode_image(junk), Error);
}

TEST_CASE("index png keeps palette indices") {
  std::vector<std::uint8_t> idx(6 * 4);
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = static_cast<std::uint8_t>(i % 5);
  const auto plane = io::decode_png_labels(io::encode_index_png(6, 4, idx));
  CHECK(plane.indexed);
  CHECK(plane.width == 6);
  CHECK(plane.height == 4);
  for (std::size_t i = 0; i < idx.size(); ++i) CHECK(plane.labels[i] == idx[i]);
  // DAVIS colours: 1 -> (128,0,0), 2 -> (0,128,0), 3 -> (128,128,0)
  const auto& pal = io::davis_palette();
  CHECK(pal[3] == 128);
  CHECK(pal[4] == 0);
  CHECK(pal[7] == 128);
  CHECK(pal[9] == 128);
  CHECK(pal[10] == 128);
}

TEST_CASE("mask png is a two-entry palette image") {
  std::mt19937 rng(2);
  const auto m = random_mask(rng, 7, 11, 0.4);
  const auto plane = io::decode_png_labels(io::encode_mask_png(m));
  CHECK(plane.indexed);
  for (std::size_t i = 0; i < m.bits.size(); ++i) CHECK(plane.labels[i] == m.bits[i]);
}

TEST_CASE("truecolor annotation packs rgb") {
  Raster r(2, 1);
  r.at(1, 0)[0] = 1;
  r.at(1, 0)[1] = 2;
  r.at(1, 0)[2] = 3;
  const auto plane = io::decode_png_labels(io::encode_png(r));
  CHECK_FALSE(plane.indexed);
  CHECK(plane.labels[0] == 0);
  CHECK(plane.labels[1] == 0x010203u);
}

TEST_CASE("jpeg round trip is close") {
  Raster r(32, 16);
  for (int y = 0; y < 16; ++y)
    for (int x = 0; x < 32; ++x) {
      auto* p = r.at(x, y);
      p[0] = static_cast<std::uint8_t>(x * 8);
      p[1] = static_cast<std::uint8_t>(y * 16);
      p[2] = 100;
    }
  const auto back = io::decode_image(io::encode_jpeg(r, 95));
  REQUIRE(back.width == 32);
  REQUIRE(back.height == 16);
  double err = 0;
  for (std::size_t i = 0; i < r.rgb.size(); ++i) err += std::abs(int(r.rgb[i]) - int(back.rgb[i]));
  CHECK(err / static_cast<double>(r.rgb.size()) < 4.0);
}

TEST_CASE("row-major mask RLE") {
  BinaryMask m(2, 3);
  m.bits = {1, 1, 0, 0, 0, 1};
  CHECK(io::rle_encode_rows(m) == std::vector<std::uint32_t>{0, 2, 3, 1});
  BinaryMask empty(2, 2);
  CHECK(io::rle_encode_rows(empty) == std::vector<std::uint32_t>{4});
  CHECK(io::rle_decode_rows({0, 2, 3, 1}, 2, 3) == m);
  CHECK_THROWS_AS(io::rle_decode_rows({2, 3, 4}, 2, 3), Error);
  CHECK_THROWS_AS(io::rle_decode_rows({1, 1}, 2, 3), Error);

  std::mt19937 rng(9);
  for (int i = 0; i < 50; ++i) {
    const auto r = random_mask(rng, 1 + static_cast<int>(rng() % 20), 1 + static_cast<int>(rng() % 20), 0.3);
    const auto counts = io::rle_encode_rows(r);
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    CHECK(total == r.bits.size());
    CHECK(io::rle_decode_rows(counts, r.height, r.width) == r);
  }
}

TEST_CASE("COCO compressed RLE") {
  // Column-major runs [4,1,4] -> "414"; [1,5,2,1] -> "152L". Deltas start at the
  // fourth run (pycocotools: i > 2), so only the last value is a delta (-4).
  BinaryMask center(3, 3);
  center.set(1, 1, true);
  CHECK(io::coco_rle_encode(center) == "414");
  CHECK(io::coco_rle_decode("414", 3, 3) == center);

  BinaryMask m(3, 3);
  const int on[] = {1, 2, 3, 4, 5, 8};  // column-major positions
  for (int p : on) m.set(p / 3, p % 3, true);
  CHECK(io::coco_rle_encode(m) == "152L");
  CHECK(io::coco_rle_decode("152L", 3, 3) == m);

  std::mt19937 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto r = random_mask(rng, 1 + static_cast<int>(rng() % 40), 1 + static_cast<int>(rng() % 40), 0.5);
    CHECK(io::coco_rle_decode(io::coco_rle_encode(r), r.height, r.width) == r);
  }
  CHECK_THROWS_AS(io::coco_rle_decode("4", 3, 3), Error);
}

TEST_CASE("wav decoding") {
  SUBCASE("library round trip of 16-bit values") {
    std::vector<float> s;
    for (int i = -50; i < 50; ++i) s.push_back(static_cast<float>(i * 300) / 32768.0f);
    for (int v : {-32768, -20001, 20000, 32767}) s.push_back(static_cast<float>(v) / 32768.0f);
    const AudioClip a(s, 16000);
    const auto b = io::decode_wav(io::encode_wav(a));
    CHECK(b.sample_rate() == 16000);
    CHECK(b.samples() == a.samples());
    // Out-of-range input saturates.
    CHECK(io::decode_wav(io::encode_wav(AudioClip({1.0f, -1.5f}, 8000))).samples() ==
          std::vector<float>{32767.0f / 32768.0f, -1.0f});
  }
  SUBCASE("stereo 16-bit is averaged") {
    std::vector<std::uint8_t> data;
    auto put = [&](std::int16_t v) {
      data.push_back(static_cast<std::uint8_t>(v & 0xFF));
      data.push_back(static_cast<std::uint8_t>((v >> 8) & 0xFF));
    };
    put(16384);
    put(0);
    put(-32768);
    put(-32768);
    const auto a = io::decode_wav(wav_bytes(2, 8000, 16, 1, data));
    REQUIRE(a.samples().size() == 2);
    CHECK(a.samples()[0] == doctest::Approx(0.25));
    CHECK(a.samples()[1] == doctest::Approx(-1.0));
  }
  SUBCASE("8-bit unsigned") {
    const auto a = io::decode_wav(wav_bytes(1, 8000, 8, 1, {128, 255, 0}));
    REQUIRE(a.samples().size() == 3);
    CHECK(a.samples()[0] == doctest::Approx(0.0));
    CHECK(a.samples()[2] == doctest::Approx(-1.0));
  }
  SUBCASE("float32") {
    std::vector<std::uint8_t> data(8);
    const float v[2] = {0.5f, -0.25f};
    std::memcpy(data.data(), v, 8);
    const auto a = io::decode_wav(wav_bytes(1, 22050, 32, 3, data));
    REQUIRE(a.samples().size() == 2);
    CHECK(a.samples()[0] == 0.5f);
    CHECK(a.samples()[1] == -0.25f);
    CHECK(a.sample_rate() == 22050);
  }
  SUBCASE("garbage") {
    const std::vector<std::uint8_t> junk{'R', 'I', 'F', 'F', 0, 0};
    CHECK_THROWS_AS(io::decode_wav(junk), Error);
  }
}

TEST_CASE("file helpers") {
  const auto dir = testkit::fresh_dir("io");
  io::write_text(dir / "a" / "b.txt", "hello");
  CHECK(io::read_text(dir / "a" / "b.txt") == "hello");
  CHECK_THROWS_AS(io::read_bytes(dir / "missing.bin"), Error);
  std::filesystem::remove_all(dir);
}
