#!/usr/bin/env python3
"""
Demo script to try the three coding studies at toy scale
"""

from netcoding.fountain import FountainSpec, estimate_fountain
from netcoding.radio_sim import throughput_sweep
from netcoding.storage_code import StorageCodeSpec, estimate_success


def demo_storage_code():
    """Decentralized erasure code: query any k of n storage nodes"""
    print("💾 Testing Decentralized Erasure Code...")
    print("=" * 50)

    for c in (0.5, 1.0, 5.0):
        spec = StorageCodeSpec(k=20, n=50, c=c, seed=7)
        stats = estimate_success(spec, trials=200)
        print(f"   c={c:<4} degree={spec.prerouting_degree():<3} "
              f"success {stats.rate:.3f}  mean rank deficit {stats.mean_rank_deficit:.2f}")
    print()


def demo_fountain():
    """Distributed fountain code: recover (1-δ)k from (1+ε)k"""
    print("⛲ Testing Distributed Fountain Code...")
    print("=" * 50)

    for k, n in ((125, 250), (250, 500)):
        spec = FountainSpec(k=k, n=n, seed=23)
        stats = estimate_fountain(spec, trials=50)
        print(f"   k={k:<4} n={n:<5} query {spec.query_size:<4} "
              f"target met {stats.rate_meeting_target:.2f}  mean fraction {stats.mean_fraction:.3f}  "
              f"pre-routing degree {stats.mean_prerouting_degree:.2f}")
    print()


def demo_radio():
    """Untuned radios: network coding vs blind forwarding"""
    print("📡 Testing Untuned Radio Backplane...")
    print("=" * 50)

    table = throughput_sweep([8, 16, 32], hop_rule="linear", trials=10, seed=29)
    for row in table.itertuples(index=False):
        print(f"   N={row.N:<3} coding {row.mean_coding:6.2f}  forwarding {row.mean_forwarding:5.2f}  "
              f"coding/N {row.coding_over_N:.3f}")
    print()


if __name__ == "__main__":
    print("🚀 Network Coding Studies Demo")
    print("=" * 60)
    print()

    try:
        demo_storage_code()
        demo_fountain()
        demo_radio()

        print("✅ All demos completed successfully!")
        print()
        print("🧪 To run a full experiment:")
        print("   python run.py storage --config data/configs/storage_minimal.json")

    except Exception as e:
        print(f"❌ Error during demo: {e}")
        import traceback
        traceback.print_exc()
