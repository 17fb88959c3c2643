#include <gtest/gtest.h>

#include <algorithm>
#include <chrono>
#include <random>
#include <thread>

#include "flightcore/bridge/client.hpp"
#include "flightcore/bridge/protocol.hpp"
#include "flightcore/bridge/server.hpp"
#include "flightcore/errors.hpp"
#include "flightcore/world/forest.hpp"
#include "flightcore/world/ply.hpp"

namespace flightcore::bridge {
namespace {

using namespace std::chrono_literals;

template <typename T>
T round_trip(const T& m) {
  const auto frame = encode(Message{m});
  FrameReader reader;
  reader.feed(frame);
  auto f = reader.next();
  EXPECT_TRUE(f.has_value());
  EXPECT_FALSE(reader.next().has_value());
  return std::get<T>(decode(f->tag, f->payload));
}

std::vector<std::uint8_t> raw_frame(std::uint8_t tag, const std::vector<std::uint8_t>& payload) {
  std::vector<std::uint8_t> out(4);
  const auto n = static_cast<std::uint32_t>(payload.size());
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::uint8_t>(n >> (8 * i));
  out.push_back(tag);
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

std::vector<std::uint8_t> id_bytes(std::uint64_t id) {
  std::vector<std::uint8_t> out(8);
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::uint8_t>(id >> (8 * i));
  return out;
}

TEST(Protocol, MessagesRoundTrip) {
  EXPECT_EQ(round_trip(Hello{7, 3}).version, 3);

  StateUpdate su{9, 1.25, {}};
  su.poses.push_back({4, Vec3(1, 2, 3), Quat(0.5, 0.5, -0.5, 0.5)});
  const StateUpdate su2 = round_trip(su);
  EXPECT_EQ(su2.id, 9u);
  EXPECT_EQ(su2.sim_time, 1.25);
  ASSERT_EQ(su2.poses.size(), 1u);
  EXPECT_EQ(su2.poses[0].env_id, 4u);
  EXPECT_EQ(su2.poses[0].p, Vec3(1, 2, 3));
  EXPECT_EQ(su2.poses[0].q.coeffs(), su.poses[0].q.coeffs());
  EXPECT_EQ(encode_payload(su).size(), 8u + 8u + 4u + 60u);

  const Configure c = round_trip(Configure{11, 5, 0.01, 0xabcdef0123456789ull});
  EXPECT_EQ(c.n_envs, 5u);
  EXPECT_EQ(c.dt, 0.01);
  EXPECT_EQ(c.params_digest, 0xabcdef0123456789ull);
  const Configure bare = round_trip(Configure{12, 3, std::nullopt, std::nullopt});
  EXPECT_FALSE(bare.dt);
  EXPECT_FALSE(bare.params_digest);

  const PointCloudRequest r = round_trip(PointCloudRequest{3, {Vec3(0, 0, 0), Vec3(1, 2, 3)}, 0.2});
  EXPECT_EQ(r.bounds.max, Vec3(1, 2, 3));
  EXPECT_EQ(r.resolution, 0.2);

  const PointCloudChunk ch = round_trip(PointCloudChunk{1, 2, 3, 4, {9, 8, 7}});
  EXPECT_EQ(ch.payload, (std::vector<std::uint8_t>{9, 8, 7}));
  EXPECT_EQ(round_trip(Ack{5, 4}).ref_id, 4u);
  EXPECT_EQ(round_trip(ErrorReply{5, 4, "nope"}).reason, "nope");
}

TEST(Protocol, RejectsMalformedPayloads) {
  auto reason = [](std::uint8_t tag, std::vector<std::uint8_t> payload) {
    try {
      decode(tag, payload);
    } catch (const ProtocolError& e) {
      return std::string(e.reason());
    }
    return std::string("accepted");
  };
  auto hello = id_bytes(1);
  hello.push_back(1);
  EXPECT_EQ(reason(0, hello), "frame length mismatch");
  EXPECT_EQ(reason(9, id_bytes(1)), "unknown tag");

  auto su = encode_payload(StateUpdate{1, 0.0, {PoseEntry{}}});
  su.pop_back();
  EXPECT_EQ(reason(1, su), "frame length mismatch");

  auto cfg = id_bytes(1);
  for (char ch : std::string("dt=0.01\n")) cfg.push_back(static_cast<std::uint8_t>(ch));
  EXPECT_EQ(reason(2, cfg).rfind("malformed configure", 0), 0u);

  auto chunk = encode_payload(PointCloudChunk{1, 2, 5, 5, {}});
  EXPECT_EQ(reason(4, chunk), "chunk index out of range");
}

TEST(Protocol, FrameReaderHandlesSplitAndOversizedFrames) {
  const auto a = encode(Ack{1, 2});
  const auto b = encode(ErrorReply{3, 4, "x"});
  std::vector<std::uint8_t> stream(a);
  stream.insert(stream.end(), b.begin(), b.end());
  FrameReader reader;
  for (std::uint8_t byte : stream) reader.feed(std::span<const std::uint8_t>(&byte, 1));
  EXPECT_EQ(reader.next()->tag, static_cast<std::uint8_t>(Tag::Ack));
  EXPECT_EQ(reader.next()->tag, static_cast<std::uint8_t>(Tag::Error));
  EXPECT_FALSE(reader.next());

  std::vector<std::uint8_t> huge{0xff, 0xff, 0xff, 0x01, 5};
  reader.feed(huge);
  EXPECT_THROW(reader.next(), ProtocolError);
}

TEST(Protocol, ChunksReassembleInAnyOrder) {
  std::vector<std::uint8_t> bytes(200000);
  std::mt19937_64 rng(2);
  for (auto& x : bytes) x = static_cast<std::uint8_t>(rng());
  auto chunks = make_chunks(bytes, 7, 100);
  ASSERT_EQ(chunks.size(), 4u);
  for (const auto& c : chunks) EXPECT_LE(c.payload.size(), kChunkBytes);
  std::shuffle(chunks.begin(), chunks.end(), rng);
  ChunkAssembler asm_;
  for (std::size_t i = 0; i < chunks.size(); ++i) {
    EXPECT_FALSE(asm_.complete());
    EXPECT_TRUE(asm_.add(chunks[i]));
  }
  EXPECT_FALSE(asm_.add(chunks[0]));
  ASSERT_TRUE(asm_.complete());
  EXPECT_EQ(asm_.bytes(), bytes);

  EXPECT_EQ(make_chunks({}, 1, 0).size(), 1u);
}

TEST(Endpoint, Parses) {
  const Endpoint e = parse_endpoint("0.0.0.0:6000");
  EXPECT_EQ(e.host, "0.0.0.0");
  EXPECT_EQ(e.port, 6000);
  EXPECT_THROW(parse_endpoint("localhost"), ArgumentError);
  EXPECT_THROW(parse_endpoint("h:99999"), ArgumentError);
}

class BridgeFixture : public ::testing::Test {
 protected:
  void SetUp() override {
    VecSimConfig c;
    c.n_envs = 2;
    sim = std::make_shared<SimulationHandle>(
        c, generate_forest(Aabb{Vec3(0, 0, 0), Vec3(10, 10, 4)}, 0.1, 0.1, 3));
    server = std::make_unique<BridgeServer>(Endpoint{"127.0.0.1", 0}, sim);
    server->start();
  }
  void TearDown() override { server->stop(); }

  Endpoint endpoint() const { return {"127.0.0.1", server->port()}; }

  std::shared_ptr<SimulationHandle> sim;
  std::unique_ptr<BridgeServer> server;
};

TEST_F(BridgeFixture, HelloAndConfigureChangeTheBroadcast) {
  BridgeClient client(endpoint());
  client.send(Hello{client.next_id()});
  ASSERT_TRUE(client.receive_as<Hello>(2s));

  const Message reply = client.configure(5, std::nullopt, 2s);
  ASSERT_TRUE(std::holds_alternative<Ack>(reply));
  EXPECT_EQ(sim->n_envs(), 5u);

  server->publish(sim->step_uniform(BodyRateCmd{9.81, Vec3::Zero()}));
  const auto update = client.receive_as<StateUpdate>(2s);
  ASSERT_TRUE(update);
  EXPECT_EQ(update->poses.size(), 5u);
  EXPECT_NEAR(update->sim_time, sim->dt(), 1e-15);
}

TEST_F(BridgeFixture, BadFramesGetErrorsAndTheConnectionSurvives) {
  BridgeClient client(endpoint());
  auto bad = id_bytes(client.next_id());
  bad.insert(bad.end(), {1, 0, 0});
  client.send_raw(raw_frame(0, bad));
  const auto err = client.receive_as<ErrorReply>(2s);
  ASSERT_TRUE(err);
  EXPECT_EQ(err->reason, "frame length mismatch");

  client.send(Hello{client.next_id()});
  EXPECT_TRUE(client.receive_as<Hello>(2s));

  client.send(Hello{1});
  const auto stale = client.receive_as<ErrorReply>(2s);
  ASSERT_TRUE(stale);
  EXPECT_EQ(stale->reason, "message id not increasing");

  client.send(Ack{client.next_id(), 1});
  const auto unexpected = client.receive_as<ErrorReply>(2s);
  ASSERT_TRUE(unexpected);
  EXPECT_EQ(unexpected->reason, "unexpected message from client");

  const Message digest = [&] {
    Configure c{client.next_id(), 3, std::nullopt, sim->params_digest() ^ 1};
    client.send(c);
    return *client.receive(2s);
  }();
  ASSERT_TRUE(std::holds_alternative<ErrorReply>(digest));
  EXPECT_GE(server->stats().frames_rejected, 4u);
}

TEST_F(BridgeFixture, PointCloudMatchesSerializedCrop) {
  BridgeClient client(endpoint());
  const Aabb box{Vec3(0, 0, 0), Vec3(10, 10, 4)};
  const auto bytes = client.request_point_cloud(box, 0.1, 10s);
  EXPECT_EQ(bytes, serialize_ply(sim->world().crop(box, 0.1)));
  EXPECT_GT(bytes.size(), kChunkBytes);
}

TEST_F(BridgeFixture, FuzzedFramesDoNotKillTheServer) {
  std::mt19937_64 rng(17);
  {
    BridgeClient fuzzer(endpoint());
    for (int i = 0; i < 200; ++i) {
      std::vector<std::uint8_t> payload(rng() % 80);
      for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
      fuzzer.send_raw(raw_frame(static_cast<std::uint8_t>(rng() % 10), payload));
    }
  }
  BridgeClient client(endpoint());
  client.send(Hello{client.next_id()});
  EXPECT_TRUE(client.receive_as<Hello>(5s));
  EXPECT_TRUE(server->running());
}

TEST_F(BridgeFixture, ThirdClientIsRefused) {
  BridgeClient a(endpoint()), b(endpoint());
  a.send(Hello{a.next_id()});
  b.send(Hello{b.next_id()});
  ASSERT_TRUE(a.receive_as<Hello>(2s));
  ASSERT_TRUE(b.receive_as<Hello>(2s));
  BridgeClient c(endpoint());
  const auto err = c.receive_as<ErrorReply>(2s);
  ASSERT_TRUE(err);
  EXPECT_EQ(err->reason, "server full");
}

TEST_F(BridgeFixture, PublishNeverBlocksAndAccountsForDrops) {
  BridgeClient slow(endpoint());
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < 2000; ++i) server->publish(sim->snapshot());
  EXPECT_LT(std::chrono::steady_clock::now() - t0, 1s);
  std::this_thread::sleep_for(200ms);
  const BridgeStats s = server->stats();
  EXPECT_EQ(s.published, 2000u);
  EXPECT_EQ(s.published, s.dropped + s.dequeued + s.queued);
  EXPECT_LE(s.queued, BridgeServer::kDefaultQueueDepth);
}

TEST(Bridge, BindFailureIsAnIoError) {
  VecSimConfig c;
  auto sim = std::make_shared<SimulationHandle>(c, OccupancyCloud(Aabb{Vec3(0, 0, 0), Vec3(1, 1, 1)}, 0.1));
  BridgeServer first(Endpoint{"127.0.0.1", 0}, sim);
  first.start();
  BridgeServer second(Endpoint{"127.0.0.1", first.port()}, sim);
  EXPECT_THROW(second.start(), IoError);
  BridgeServer bogus(Endpoint{"256.1.1.1", 0}, sim);
  EXPECT_THROW(bogus.start(), IoError);
  first.stop();
}

TEST(Bridge, ConnectFailureIsAnIoError) {
  VecSimConfig c;
  auto sim = std::make_shared<SimulationHandle>(c, OccupancyCloud(Aabb{Vec3(0, 0, 0), Vec3(1, 1, 1)}, 0.1));
  std::uint16_t port;
  {
    BridgeServer s(Endpoint{"127.0.0.1", 0}, sim);
    s.start();
    port = s.port();
    s.stop();
  }
  EXPECT_THROW(BridgeClient(Endpoint{"127.0.0.1", port}), IoError);
}

}  // namespace
}  // namespace flightcore::bridge
