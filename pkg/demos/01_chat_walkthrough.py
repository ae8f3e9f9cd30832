"""Three chatters, one scripted afternoon.

Run with ``python demos/01_chat_walkthrough.py``. The script below is the
same one the golden test freezes; here we watch it unfold tick by tick.
"""

from masforge import chat_model_path
from masforge.chatapp import ChatSession, parse_script, render_areas, replay
from masforge.modelc import load_model

SCRIPT = """\
0 alice say anyone there?
1 alice declare bob
2 alice say first
2 alice say second
3 bob declare alice
4 bob say got both
5 bob clear
5 carol say nobody hears this
"""

# %% The chat model is an ordinary model file: three reactive agents whose
# rules turn user stimuli into informs and board posts.
model = load_model(chat_model_path())
print([(a.name, a.kind.value, len(a.stimulus_rules)) for a in model.agents])

# %% Drive the runtime one tick at a time and look at every agent's areas.
events = parse_script(SCRIPT)
session = ChatSession(model)
last = max(e.tick for e in events)
while session.tick <= last + 1:
    now = [e for e in events if e.tick == session.tick]
    new = session.step(now)
    print(f"\n== tick {session.tick - 1}: {len(now)} user events, {len(new)} transcript records")
    print(render_areas(session.transcript, session.agents))

# %% alice's first message never left: she had no receiver yet. carol's
# message at tick 5 shares that fate. Bob's clear wiped only his own areas.
print("\nheld by the reference model:", [(e.agent, e.text) for e in replay(session.agents, events).held])

# %% The independent reference model produces the same transcript.
assert replay(session.agents, events).transcript() == session.transcript
print(session.transcript.dumps(), end="")
