"""
Tests for the agent frame codec, socket channels and two-process ADMM
"""

import socket
import threading

import pytest

from mwen.admm import AdmmConfig, run_admm
from mwen.core.errors import (
    AdmmAborted,
    ChecksumError,
    ProtocolError,
    TruncatedFrameError,
    VersionMismatchError,
)
from mwen.models import water_power_bounds
from mwen.transport import (
    COUPLING_VECTOR,
    OBJECTIVE_SCALAR,
    decode_frame,
    encode_frame,
    loopback_pair,
    make_message,
    parse_address,
    run_agent,
)


@pytest.fixture
def vector_frame():
    return encode_frame(make_message(3, "MEM", COUPLING_VECTOR, [1.5, 40.25]), horizon=2)


class TestFrameCodec:
    """Test length-prefixed JSON frames"""

    def test_round_trip(self, vector_frame):
        message = decode_frame(vector_frame, horizon=2)
        assert message.fields() == {"v": 1, "iter": 3, "role": "MEM", "kind": COUPLING_VECTOR, "data": [1.5, 40.25]}
        assert message.crc32 == message.checksum()

    def test_field_order(self, vector_frame):
        assert vector_frame[4:].startswith(b'{"v":1,"iter":3,"role":"MEM","kind":"coupling_vector","data":')
        assert int.from_bytes(vector_frame[:4], "big") == len(vector_frame) - 4

    def test_empty_vector(self):
        with pytest.raises(ProtocolError):
            make_message(0, "MEM", COUPLING_VECTOR, [])

    def test_scalar_needs_one_value(self):
        with pytest.raises(ProtocolError):
            make_message(1, "MEM", OBJECTIVE_SCALAR, [1.0, 2.0])

    def test_horizon_mismatch_on_encode(self):
        with pytest.raises(ProtocolError, match="horizon is 3"):
            encode_frame(make_message(1, "MWM", COUPLING_VECTOR, [1.0, 2.0]), horizon=3)

    def test_horizon_mismatch_on_decode(self, vector_frame):
        with pytest.raises(ProtocolError):
            decode_frame(vector_frame, horizon=24)

    def test_truncated(self, vector_frame):
        with pytest.raises(TruncatedFrameError):
            decode_frame(vector_frame[:-3])

    def test_trailing_bytes(self, vector_frame):
        with pytest.raises(ProtocolError, match="trailing"):
            decode_frame(vector_frame + b"x")

    def test_checksum(self, vector_frame):
        tampered = vector_frame.replace(b"40.25", b"41.25")
        with pytest.raises(ChecksumError):
            decode_frame(tampered)

    def test_version(self, vector_frame):
        with pytest.raises(VersionMismatchError) as exc:
            decode_frame(vector_frame.replace(b'"v":1', b'"v":2'))
        assert exc.value.exit_code == 6

    def test_parse_address(self):
        assert parse_address("127.0.0.1:7600") == ("127.0.0.1", 7600)
        with pytest.raises(ProtocolError):
            parse_address("no-port")


class TestSocketChannel:
    """Test frames over a connected socket pair"""

    def test_send_and_receive(self):
        left, right = loopback_pair(horizon=2, timeout=5.0)
        with left, right:
            left.send(make_message(1, "MEM", COUPLING_VECTOR, [1.0, 2.0]))
            message = right.recv()
            assert message.data == (1.0, 2.0)
            assert (left.sent, right.received) == (1, 1)

    def test_capture(self):
        left, right = loopback_pair(horizon=1, timeout=5.0, capture=True)
        with left, right:
            left.send(make_message(1, "MEM", OBJECTIVE_SCALAR, [12.5]))
            right.recv()
            assert b"objective_scalar" in bytes(right.inbound)
            assert left.inbound is None


class TestAgents:
    """Test the two agents talking over a loopback channel"""

    @pytest.fixture
    def config(self, water_scenario, curves_for):
        bounds = water_power_bounds(water_scenario, curves_for(water_scenario))
        return AdmmConfig(rho=0.1, max_iters=4, coupling_bounds=bounds, timeout=30.0)

    def _run_pair(self, scenario, curves, config):
        mem_end, water_end = loopback_pair(horizon=scenario.horizon, timeout=30.0, capture=True)
        outcome = {}

        def water_side():
            try:
                outcome["ack"] = run_agent("mwm", water_end, scenario.mwm_view(), config, curves)
            except Exception as e:
                outcome["error"] = e

        thread = threading.Thread(target=water_side)
        thread.start()
        solution = run_agent("mem", mem_end, scenario.mem_view(), config)
        thread.join(timeout=60)
        return solution, outcome, water_end

    def test_matches_in_process_run(self, water_scenario, curves_for, config):
        curves = curves_for(water_scenario)
        local = run_admm(water_scenario, curves, config)
        remote, outcome, _ = self._run_pair(water_scenario, curves, config)
        assert "error" not in outcome
        assert [r.model_dump() for r in remote.iterations] == [r.model_dump() for r in local.iterations]
        assert remote.restored_cost == local.restored_cost
        assert outcome["ack"].iterations == len(local.iterations)

    def test_no_private_data_on_the_wire(self, water_scenario, curves_for, config):
        _, outcome, water_end = self._run_pair(water_scenario, curves_for(water_scenario), config)
        wire = bytes(water_end.inbound)
        assert wire
        for secret in (b"price", b"cost", b"no_load", b"gas"):
            assert secret not in wire

    def test_water_disconnect_aborts(self, water_scenario, curves_for, config):
        curves = curves_for(water_scenario)
        mem_end, water_end = loopback_pair(horizon=water_scenario.horizon, timeout=30.0)

        def vanish():
            water_end.send(make_message(0, "MWM", COUPLING_VECTOR, [0.0] * water_scenario.horizon))
            water_end.recv()
            water_end.close()

        thread = threading.Thread(target=vanish)
        thread.start()
        with pytest.raises(AdmmAborted) as exc:
            run_agent("mem", mem_end, water_scenario.mem_view(), config)
        thread.join(timeout=30)
        assert exc.value.exit_code == 6

    @pytest.mark.slow
    def test_bundled_tcp_run_matches_in_process_run(self, bundled_loader, curves_for):
        scenario = bundled_loader.load("scenario_a")
        curves = curves_for(scenario)
        config = AdmmConfig(rho=0.01, mode="objective_based", ob_window=2, max_iters=3,
                            coupling_bounds=water_power_bounds(scenario, curves), timeout=600.0)
        local = run_admm(scenario, curves, config)

        with socket.socket() as free:
            free.bind(("127.0.0.1", 0))
            address = f"127.0.0.1:{free.getsockname()[1]}"
        outcome = {}

        def water_side():
            try:
                outcome["ack"] = run_agent("mwm", address, scenario.mwm_view(), config, curves)
            except Exception as e:
                outcome["error"] = e

        thread = threading.Thread(target=water_side)
        thread.start()
        remote = run_agent("mem", address, scenario.mem_view(), config)
        thread.join(timeout=600)
        assert "error" not in outcome
        assert [r.model_dump() for r in remote.iterations] == [r.model_dump() for r in local.iterations]
        assert remote.restored_cost == local.restored_cost
        assert remote.stop_reason == local.stop_reason

    def test_bounds_required(self, water_scenario):
        mem_end, water_end = loopback_pair()
        with mem_end, water_end:
            with pytest.raises(ProtocolError, match="coupling_bounds"):
                run_agent("mem", mem_end, water_scenario.mem_view(), AdmmConfig())

    def test_unknown_role(self, water_scenario, config):
        with pytest.raises(ProtocolError, match="Unknown agent role"):
            run_agent("pump", "127.0.0.1:1", water_scenario, config)
