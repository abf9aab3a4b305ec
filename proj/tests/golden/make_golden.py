"""Independent renderer for the prompt golden files.

Builds the expected prompt text for the fixture game used in
context_test.cpp directly from the template wording, without going through
the C++ code. Run from this directory: python3 make_golden.py
"""

ROLE_SYSTEM = (
    "You are a helpful assistant that uses the chat between six players, player-1 to player-6, who play Avalon: "
    "The Resistance (a cooperative-competitive game) to identify who is Merlin, Good or Evil. There are two evil "
    "players, which can usually be found because they are deceptive and lie about the good player's roles and vote "
    "for quests and parties irrationally. For Merlin, watch out for individuals with knowledge of evil players' "
    "identities, insightful comments beyond their role, and caution regarding mission teams or specific players."
)
MERLIN_SYSTEM = (
    "You are a helpful assistant that uses the chat between six players, player-1 to player-6, who play Avalon: "
    "The Resistance (a cooperative-competitive game) to identify who is Merlin. There are three good players, "
    "Merlin, who is also a good player, and two evil players. Evil can usually be found because they are deceptive "
    "and lie about the good player's roles and vote for parties and quests irrationally. For Merlin, watch out for "
    "individuals with knowledge of evil players' identities, insightful comments beyond their role, and caution "
    "regarding mission teams or specific players."
)
ROLE_Q = ("What do you think is the role of each player? Please do not explain your answer, do not elaborate on it "
          "further, and do not say that these are just guesses; only provide the list and nothing else.")
MERLIN_Q = "Who do you think is Merlin? Please do not explain your answer, do not elaborate on it further."

votes = ", ".join(f"player-{i}: yes" for i in range(1, 7))
STATE = f"quest-1: success (party: player-1, player-2 | player votes: {votes})"
BELIEF = "player-1: good, player-2: merlin, player-3: good, player-4: evil, player-5: good, player-6: evil"

# (speaker, text); speaker None = system narrator
ROUND1 = [
    (None, "Game Started!"),
    (None, "player-1 proposed a party: player-1, player-2"),
    (1, "This is the first round, we don't have a lot of information so I propose myself and the next person player-2."),
    (2, "I agree with player-1. I am good too."),
    (3, "I think I am fine with the team as well"),
    (4, "i am good with that"),
    (5, "No opinions in the first turn. I'm fine with this party"),
    (6, "Oh, yeah, I am good with this. We don't know anything at this point anyways"),
    (None, "Party Vote Outcome: " + ", ".join(f"player-{i}: Yes" for i in range(1, 7))),
    (None, "Vote Succeeded! Initiating Quest Vote!"),
    (None, "Quest Succeeded!"),
]
ROUND2 = [
    (2, "Quest one went well. I will keep player-1 and add player-3."),
    (None, "player-2 proposed a party: player-1, player-2, player-3"),
    (3, "Fine by me."),
]


def chat_lines(entries, modality):
    out = []
    for speaker, text in entries:
        if speaker is None and modality == "chat":
            continue
        if speaker is not None and modality == "state":
            continue
        out.append(("system" if speaker is None else f"player-{speaker}") + ": " + text)
    return out


def render(task, mode, modality):
    entries = ROUND2 if mode == "round" else ROUND1 + ROUND2
    human = []
    if modality != "chat":
        human.append("The current state is: " + STATE)
        human.append("The current party proposal is: none")
    if mode == "round":
        human.append("Your initial belief is: " + BELIEF)
    if task == "merlin":
        human.append("You know that player-4, player-6 are evil.")
    human.append("This is the chat between player-1 to player-6:")
    human.extend(chat_lines(entries, modality))
    human.append(ROLE_Q if task == "roles" else MERLIN_Q)
    system = ROLE_SYSTEM if task == "roles" else MERLIN_SYSTEM
    text = "system: " + system + "\nhuman: " + "\n".join(human)
    if task == "merlin":
        text += "\nassistant:"
    return text


for task in ("roles", "merlin"):
    for mode in ("round", "full"):
        for modality in ("chat", "state", "chat+state"):
            name = f"{task}_{mode}_{modality.replace('+', '_')}.txt"
            with open(name, "w") as f:
                f.write(render(task, mode, modality))
