#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <unistd.h>

#include "parplan/util.hpp"

namespace parplan {
namespace {

TEST(Sha256Test, KnownVectors) {
  EXPECT_EQ(sha256_hex(""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(FileTest, AtomicWriteAndJsonl) {
  auto dir = std::filesystem::temp_directory_path() / ("parplan_util_" + std::to_string(::getpid()));
  auto path = dir / "nested" / "a.jsonl";
  write_file_atomic(path, "{\"a\":1}\n\n[2]\n");
  auto lines = read_jsonl(path);
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[1][0], 2);
  write_file_atomic(path, "{\"a\":1}\nnope\n");
  try {
    read_jsonl(path);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kSchemaMismatch);
    EXPECT_NE(std::string(e.what()).find("2"), std::string::npos);
  }
  // Only the target file remains; no temporaries left behind.
  std::size_t entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir / "nested")) ++entries;
  EXPECT_EQ(entries, 1u);
  EXPECT_THROW(read_file(dir / "missing"), Error);
  std::filesystem::remove_all(dir);
}

TEST(ParallelForTest, RunsEveryIndexAndRethrows) {
  std::vector<std::atomic<int>> hits(100);
  parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
  for (auto& h : hits) EXPECT_EQ(h.load(), 1);
  EXPECT_THROW(parallel_for(50, 3,
                            [](std::size_t i) {
                              if (i == 17) throw Error(ErrorCode::kIo, "boom");
                            }),
               Error);
  parallel_for(0, 2, [](std::size_t) { FAIL(); });
}

}  // namespace
}  // namespace parplan
