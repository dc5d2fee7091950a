#include <gtest/gtest.h>

#include <fstream>

#include "gos/event_log.hpp"
#include "test_support.hpp"

namespace gos {
namespace {

SurveyEvent event(std::uint64_t seq) {
  return {seq, EventKind::response, "s1", {{"n", seq}}};
}

TEST(EventLog, AppendAndReadBack) {
  testing::TempDir dir;
  {
    EventLog log(dir.path());
    for (std::uint64_t i = 1; i <= 5; ++i) log.append(event(i));
  }
  EventLog log(dir.path());
  auto all = log.read_after(0);
  ASSERT_EQ(all.size(), 5u);
  EXPECT_EQ(all[4].payload["n"], 5);
  EXPECT_EQ(all[0].kind, EventKind::response);
  EXPECT_EQ(log.read_after(3).size(), 2u);
}

TEST(EventLog, TornTailIsDroppedAndAppendsContinue) {
  testing::TempDir dir;
  {
    EventLog log(dir.path());
    log.append(event(1));
    log.append(event(2));
  }
  {
    std::ofstream out(dir.path() / "events.jsonl", std::ios::app | std::ios::binary);
    out << R"({"seq":3,"kind":"resp)";
  }
  testing::QuietLogs quiet;
  EventLog log(dir.path());
  EXPECT_EQ(log.read_after(0).size(), 2u);
  log.append(event(3));
  auto all = log.read_after(0);
  ASSERT_EQ(all.size(), 3u);
  EXPECT_EQ(all[2].sequence, 3u);
}

TEST(EventLog, CorruptMiddleRecordThrows) {
  testing::TempDir dir;
  write_file(dir.path() / "events.jsonl",
             event(1).to_json().dump() + "\nnot json\n" + event(2).to_json().dump() + "\n");
  EventLog log(dir.path());
  EXPECT_THROW(log.read_after(0), std::runtime_error);
}

TEST(EventLog, SnapshotReplacesAtomically) {
  testing::TempDir dir;
  EventLog log(dir.path());
  EXPECT_FALSE(log.read_snapshot());
  log.write_snapshot({4, {{"x", 1}}});
  log.write_snapshot({9, {{"x", 2}}});
  auto snap = log.read_snapshot();
  ASSERT_TRUE(snap);
  EXPECT_EQ(snap->sequence, 9u);
  EXPECT_EQ(snap->state["x"], 2);
  for (const auto& entry : std::filesystem::directory_iterator(dir.path()))
    EXPECT_EQ(entry.path().extension() == ".tmp", false) << entry.path();
}

TEST(EventLog, LeftoverTempSnapshotIsIgnored) {
  testing::TempDir dir;
  EventLog log(dir.path());
  log.write_snapshot({2, {{"x", 1}}});
  write_file(dir.path() / "snapshot.json.tmp", "{\"sequence\": 99, \"sta");
  auto snap = log.read_snapshot();
  ASSERT_TRUE(snap);
  EXPECT_EQ(snap->sequence, 2u);
}

TEST(EventKinds, NamesRoundTrip) {
  for (auto k : {EventKind::created, EventKind::response, EventKind::annotation_import, EventKind::cluster_run})
    EXPECT_EQ(parse_event_kind(event_kind_name(k)), k);
  EXPECT_FALSE(parse_event_kind("nope"));
  auto e = event(7);
  auto back = SurveyEvent::from_json(e.to_json());
  EXPECT_EQ(back.sequence, 7u);
  EXPECT_EQ(back.payload, e.payload);
}

}  // namespace
}  // namespace gos
