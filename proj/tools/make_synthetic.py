#!/usr/bin/env python3
"""Regenerates data/synthetic/{corpus,qa}.jsonl and lexicon.tsv, checking the
fixture invariants the evaluation tests rely on. graph.tsv is hand-written."""
import json, random, re, sys, os

OUT = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "data", "synthetic")

def tok(s):
    return [t for t in re.split(r"[^0-9a-z]+", s.lower()) if t]

# (doc_id, title, text, kind, question, gold, wrongs, gold_pos, lexicon[(phrase, expansion)], explanation)
T = [
("ts-timing-advance", "Uplink timing control",
 "Timing advance compensates propagation delay between the terminal and the base station. The network sends a timing advance command inside a MAC control element, and the terminal shifts its uplink frame start earlier by the signalled amount, expressed in sixteen Ts multiples.",
 "K", "In what granularity is a timing advance command expressed?", "sixteen Ts multiples",
 ["lantern cadence", "velvet quarter steps", "orchard slot halves"], 1, [],
 "The timing advance command is expressed in sixteen Ts multiples."),
("ts-harq", "Hybrid retransmission",
 "Hybrid automatic repeat request combines soft bits from a failed transmission with its retransmission. FDD operation uses eight parallel stop-and-wait processes, so the transmitter never idles while awaiting acknowledgement feedback.",
 "K", "How many parallel stop-and-wait processes does hybrid automatic repeat request use in FDD?", "eight",
 ["eleven", "nineteen", "forty"], 3, [],
 "FDD hybrid repeat request runs eight parallel stop-and-wait processes."),
("ts-drx", "Discontinuous reception",
 "Discontinuous reception lets the terminal power down its receiver between monitoring windows. The DRX cycle length together with onDuration and inactivity timers sets the balance between battery drain and downlink latency.",
 "K", "Which timers accompany the DRX cycle length in discontinuous reception?", "onDuration inactivity",
 ["glacier pause", "pigment watchdog", "harbor backoff"], 2, [],
 "The DRX cycle length works with the onDuration and inactivity timers."),
("ts-rach", "Random access",
 "Contention based random access proceeds in stages: preamble transmission, random access response, scheduled transmission and contention resolution. Preambles are Zadoff-Chu sequences derived from a configured root index.",
 "K", "Which sequence family provides random access preambles?", "Zadoff Chu",
 ["Walsh Barker", "Gold Kasami", "Hadamard Golay"], 1, [],
 "Random access preambles are Zadoff-Chu sequences derived from a root index."),
("ts-pci", "Physical cell identity",
 "A physical cell identity combines a secondary synchronization group with a primary synchronization offset. LTE defines 504 distinct identities, which planners reuse across distant cells while avoiding collisions and confusion between neighbours.",
 "K", "How many distinct physical cell identities does LTE define?", "504",
 ["1008", "127", "8192"], 4, [],
 "LTE defines 504 physical cell identities."),
("ts-cqi", "Channel quality reporting",
 "CQI reports map measured SINR onto a compact index. The scheduler uses that index to select modulation order and coding scheme, targeting a transport block error probability near ten percent.",
 "K", "What transport block error probability does CQI selection target?", "ten percent",
 ["forty permille", "cobalt tenth", "saddle quarter"], 2, [],
 "CQI selection targets roughly ten percent block error probability."),
("ts-bwp", "Bandwidth parts",
 "A bandwidth part is a contiguous subset of common resource blocks with its own numerology. A terminal may hold up to four configured downlink bandwidth parts yet only one stays active at any instant.",
 "K", "How many configured downlink bandwidth parts may a terminal hold?", "four",
 ["twelve", "sixty", "thirty"], 3, [],
 "Up to four downlink bandwidth parts can be configured, one active at a time."),
("ts-ssb", "Synchronization signal block",
 "A synchronization signal block occupies 240 subcarriers over consecutive OFDM symbols. It carries primary and secondary synchronization signals plus the physical broadcast channel, and beams sweep across burst sets repeating every twenty milliseconds by default.",
 "K", "How many subcarriers does a synchronization signal block occupy over consecutive OFDM symbols?", "240",
 ["96", "312", "1200"], 4, [],
 "The synchronization signal block spans 240 subcarriers."),
("ts-pdcp", "Packet data convergence",
 "The packet data convergence protocol performs header compression using ROHC, ciphering, integrity protection and in-sequence delivery. Duplication can send identical PDUs over two RLC entities to raise reliability.",
 "K", "Which header compression scheme does the packet data convergence protocol use?", "ROHC",
 ["VJHC", "IPHC", "SigComp"], 2, [],
 "PDCP uses ROHC for header compression."),
("ts-handover-a3", "Measurement events",
 "Event A3 triggers when a neighbour becomes offset better than the serving cell. Hysteresis and timeToTrigger suppress ping-pong handovers caused by fading fluctuations near cell borders.",
 "K", "Which parameters suppress ping-pong handovers for event A3?", "hysteresis timeToTrigger",
 ["lantern damping", "quill guard", "meadow latch"], 3, [],
 "Hysteresis and timeToTrigger suppress ping-pong handovers."),

# paraphrase items: the question shares no token with its gold chunk
("ts-power-control", "Uplink power control",
 "Open loop uplink power control sets transmit power from the nominal target P0 plus alpha times estimated pathloss. Fractional compensation with alpha below unity curbs interference that cell edge terminals inflict on adjacent cells.",
 "P", "What knob lets a phone only partly make up for signal fading when deciding how loud it talks?", "alpha fractional",
 ["tundra gain", "marble bias", "falcon slope"], 2,
 [("partly make up", "fractional compensation"), ("how loud it talks", "uplink transmit power")],
 "Fractional compensation scales pathloss by alpha below unity."),
("ts-carrier-agg", "Carrier aggregation",
 "Carrier aggregation bonds several component carriers, each up to 20 MHz wide, into one wider channel. A primary cell anchors signalling while secondary cells add capacity; Release 10 permits five component carriers totalling 100 MHz.",
 "P", "What count of pieces gets glued together when bundling spectrum chunks?", "five 100 MHz",
 ["seven 140 megahertz", "nine 180 megahertz", "three 60 megahertz"], 3,
 [("glued together", "carrier aggregation"), ("spectrum chunks", "component carriers")],
 "Five component carriers totalling 100 MHz may be aggregated."),
("ts-mimo", "Spatial multiplexing",
 "Spatial multiplexing transmits independent layers from multiple antennas. Rank indicator feedback tells the base station how many layers the channel supports, while precoding matrix indicators select codebook entries.",
 "P", "Which report gives what number of parallel streams my radio link can carry?", "rank indicator",
 ["velvet token", "orchard meter", "glacier flag"], 4,
 [("parallel streams", "spatial multiplexing layers"), ("report gives", "rank indicator feedback")],
 "Rank indicator feedback reports the supported layer count."),
("ts-paging", "Paging",
 "Idle terminals wake only at paging occasions within paging frames computed from UE_ID modulo N. Core network initiated paging uses S-TMSI to reach devices whose location is known at tracking area granularity.",
 "P", "When sleeping, what identifier gets used when towers call out looking for my phone?", "TMSI",
 ["GUTI", "IMEI", "RNTI"], 2,
 [("call out looking", "paging occasions"), ("towers call", "core network initiated paging")],
 "Core network paging addresses the device by S-TMSI."),
("ts-cyclic-prefix", "Cyclic prefix",
 "OFDM symbols are preceded by a cyclic prefix copied from their tail. The normal prefix lasts about 4.7 microseconds, absorbing delay spread so that multipath echoes never leak between symbols.",
 "P", "For how long does this little duplicated guard piece protect against echo smearing?", "4 7 microseconds",
 ["9 3 nanoseconds", "2 1 seconds", "6 6 ticks"], 3,
 [("duplicated guard", "cyclic prefix"), ("echo smearing", "multipath delay spread")],
 "The normal cyclic prefix lasts about 4.7 microseconds."),
("ts-network-slicing", "Network slicing",
 "Network slicing partitions shared infrastructure into isolated logical networks. Each slice is identified by S-NSSAI, which combines a slice service type with an optional slice differentiator chosen by operators.",
 "P", "What label names one virtual piece when carriers carve up common gear?", "NSSAI differentiator",
 ["SUCI meadow", "PLMN quill", "DNN lantern"], 4,
 [("carve up", "network slicing"), ("virtual piece", "isolated logical networks slice")],
 "Each slice carries an S-NSSAI with an optional slice differentiator."),
("ts-spectrum-sharing", "Dynamic spectrum sharing",
 "Dynamic spectrum sharing lets LTE and NR coexist on identical carriers. Rate matching around cell specific reference signals prevents NR transmissions from colliding with legacy pilots, and the scheduler splits resources per millisecond.",
 "P", "How do newer 5G radios avoid stepping onto older 4G beacons within one frequency?", "rate matching",
 ["cobalt dodging", "saddle skipping", "harbor masking"], 2,
 [("older 4g beacons", "cell specific reference signals"), ("within one frequency", "dynamic spectrum sharing")],
 "Rate matching around CRS avoids collisions with legacy pilots."),
("ts-beam-failure", "Beam failure recovery",
 "Beam failure recovery begins once the count of beam failure instances reaches a configured maximum. The terminal then picks a candidate beam whose reference signal power exceeds a threshold and signals it through dedicated random access.",
 "P", "What happens after my phone loses its directional radio lock too many times?", "candidate beam",
 ["pigment scan", "falcon hop", "tundra retune"], 3,
 [("directional radio lock", "beam failure recovery"), ("too many times", "instances reaches maximum")],
 "After enough beam failure instances, a candidate beam is signalled via random access."),
("ts-qos-flow", "Quality of service flows",
 "User plane traffic is mapped onto QoS flows identified by QFI. Each flow carries a 5QI defining resource type, priority level, packet delay budget and error ratio.",
 "P", "Which tag marks app streams inside 5G sessions for guaranteed treatment?", "QFI 5QI",
 ["DSCP marble", "TOS velvet", "VLAN orchard"], 2,
 [("app streams", "qos flows"), ("guaranteed treatment", "priority level packet delay budget")],
 "QoS flows are identified by QFI and characterised by a 5QI."),
("ts-spectrum-allocation", "Spectrum allocation",
 "Dynamic allocation assigns spectrum bands to user demands while tracking interference levels across neighbouring sectors. Coordinated allocation avoids co-channel overlap through interference graphs colouring adjacent sectors.",
 "P", "When deciding which frequencies go where, which technique stops nearby sites from clashing?", "graphs colouring",
 ["glacier tiling", "quill weaving", "meadow stacking"], 4,
 [("frequencies go where", "spectrum allocation"), ("nearby sites", "neighbouring sectors"), ("clashing", "co channel overlap")],
 "Coordinated allocation colours interference graphs so adjacent sectors avoid overlap."),
]

FILLER_VOCAB = """network terminal station cell downlink uplink channel signal signals frequency carrier capacity
throughput latency scheduler scheduling resource resources block blocks slot slots frame frames symbol
symbols subframe control data plane user core radio access interface protocol layer configuration
configured measurement measurements report reporting parameter parameters procedure procedures message
messages bearer bearers mobility handover operator operators deployment coverage traffic load balancing
antenna antennas transmission reception receiver transmitter modulation coding power energy efficiency
node nodes gateway function functions service services session sessions security authentication key
keys release specification requirement requirements test testing performance indicator indicators
threshold timer value values range index field fields mapping allocation grant grants request response
feedback estimate estimation quality reliability priority queue buffer status state idle connected
inactive mode modes band bands bandwidth numerology spacing subcarrier subcarriers guard period
pattern patterns sequence sequences reference pilot pilots synchronization broadcast system
information block parameters list neighbour neighbours sector sectors site sites backhaul fronthaul
transport packet packets header payload segment segments retransmission acknowledgement window"""

def main():
    rng = random.Random(20261019)
    gold_tokens = set()
    for t in T:
        gold_tokens |= set(tok(t[5]))
    wrong_tokens = set()
    for t in T:
        for w in t[6]:
            wrong_tokens |= set(tok(w))
    vocab = [w for w in FILLER_VOCAB if w not in gold_tokens and w not in wrong_tokens]

    docs = []
    for t in T:
        docs.append({"doc_id": t[0], "title": t[1], "text": t[2], "source": "synthetic"})
    for i in range(int(sys.argv[1]) if len(sys.argv) > 1 else 120):
        words = [rng.choice(vocab) for _ in range(rng.randint(30, 45))]
        text = " ".join(words).capitalize() + "."
        docs.append({"doc_id": f"filler-{i:03d}", "title": f"Background note {i}", "text": text, "source": "synthetic"})

    # properties
    corpus_tokens = {}
    for d in docs:
        for x in set(tok(d["text"])):
            corpus_tokens.setdefault(x, set()).add(d["doc_id"])
    ok = True
    for t in T:
        gt = set(tok(t[5]))
        for x in gt:
            where = corpus_tokens.get(x, set())
            if where != {t[0]}:
                print("gold token", x, "of", t[0], "found in", sorted(where)); ok = False
        for w in t[6]:
            for x in tok(w):
                if x in corpus_tokens:
                    print("wrong token", x, "of", t[0], "in corpus", sorted(corpus_tokens[x])[:3]); ok = False
        if t[3] == "P":
            shared = set(tok(t[4])) & set(tok(t[2]))
            if shared:
                print("paraphrase", t[0], "shares", shared); ok = False
            if t[7] == 1:
                print("paraphrase gold is option 1", t[0]); ok = False
            for phrase, exp in t[8]:
                ph = tok(phrase); q = tok(t[4])
                if not any(q[i:i+len(ph)] == ph for i in range(len(q))):
                    print("phrase not in question", t[0], phrase); ok = False
                missing = [x for x in tok(exp) if x not in set(tok(t[2]))]
                if missing:
                    print("expansion tokens missing from gold chunk", t[0], missing)
        else:
            shared = set(tok(t[4])) & set(tok(t[2]))
            if len(shared) < 3:
                print("keyword item weakly anchored", t[0], shared)
    if not ok:
        sys.exit(1)

    os.makedirs(OUT, exist_ok=True)
    with open(f"{OUT}/corpus.jsonl", "w") as f:
        for d in docs:
            f.write(json.dumps(d) + "\n")
    with open(f"{OUT}/qa.jsonl", "w") as f:
        for i, t in enumerate(T):
            opts = list(t[6])
            opts.insert(t[7] - 1, t[5])
            rec = {
                "qa_id": f"syn-{i+1:02d}",
                "question": t[4],
                "options": [{"label": f"option {j+1}", "text": o} for j, o in enumerate(opts)],
                "answer_label": f"option {t[7]}",
                "explanation": t[9],
                "category": "keyword" if t[3] == "K" else "paraphrase",
            }
            f.write(json.dumps(rec) + "\n")
    with open(f"{OUT}/lexicon.tsv", "w") as f:
        f.write("# colloquial phrase<TAB>standards terminology\n")
        for t in T:
            for phrase, exp in t[8]:
                f.write(f"{phrase}\t{exp}\n")
    print("ok", len(docs), "docs")

main()
