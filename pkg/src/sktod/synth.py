"""Deterministic surrogate release for desk-scale benchmarking.

Emits the documented three-file layout (knowledge.json plus per-split
logs.json/labels.json) at the released corpus's scale: 143 entities
(33 hotels, 110 restaurants), 1,430 reviews, exactly 8,013 review
sentences, and 14,768 / 2,129 / 2,799 target-true instances with
proportionally sized non-target negatives.  Dialogue shape, request
length, snippet length, multi-entity rates, and the lexical overlap
between requests and review sentences are tuned so the engine's lexical
baselines land in the same bands as on the real corpus; the engine
itself never special-cases this data.

Everything is a pure function of the seed: entity quality profiles,
review sentences, dialogue skeletons, tracking-error injections, and
reference responses all draw from named sub-streams of one master seed.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass
from pathlib import Path

from .track import name_variants, ngram_match_score

logger = logging.getLogger(__name__)

GENERATOR_VERSION = "synth/1"

TARGET_TRUE = {"train": 14768, "val": 2129, "test": 2799}
NEGATIVES = {"train": 13783, "val": 1987, "test": 2613}  # 18,383 split like the positives
MULTI_ENTITY_RATE = {"train": 412 / 14768, "val": 199 / 2129, "test": 436 / 2799}
TOTAL_SENTENCES = 8013
REVIEWS_PER_ENTITY = 10

# Lexical-difficulty knobs, calibrated once against the engine's lexical
# baselines and then frozen.  gold keyword rates control how many gold
# sentences share vocabulary with the request; the fragment rate controls
# how often a reference response lifts a phrase from a gold snippet.
KEYWORD_SENTENCE_RATE = 0.75   # review sentence names its aspect explicitly
SECONDARY_KEYWORD_RATE = 0.22  # ... with a secondary keyword instead of the primary
FRAGMENT_LIFT_RATE = 0.45      # reference response quotes a 3-6 token snippet fragment
NEUTRAL_RATE = 0.10
FILLER_RATE = 0.16

# Entity-tracking error injection rates (targets: accuracy ~0.91,
# missing ~2%, spurious ~7.6%).
SPURIOUS_PAIR_RATE = 0.070
TYPO_MISS_RATE = 0.014
LATE_DISTRACTOR_RATE = 0.006

HOTEL_NAMES = [
    "Cityroomz", "The Gonville Hotel", "Alexander House", "Harbourview Hotel",
    "The Lensfield", "Arbury Lodge", "Ashley Court Hotel", "Avalon Guesthouse",
    "The Belfry", "Bridgepoint Inn", "Carolina Guesthouse", "The Cambria",
    "Duxford Lodge", "Eastbrook Hotel", "Fenner Place", "The Grafton Arms",
    "Hamilton Lodge", "Kirkwood House", "The Lantern Hotel", "Maplewood Guesthouse",
    "Northgate Hotel", "Oakfield Manor", "The Pemberly", "Quayside Hotel",
    "Rosewell Inn", "The Silverton", "Tamar House", "Ullswater Lodge",
    "Vantage Point Hotel", "Westbrook Hall", "The Wyvern", "Yarrow Guesthouse",
    "Zetland House",
]

RESTAURANT_NAMES = [
    "The Golden Wok", "La Tasca Verde", "Bangkok Garden", "The Copper Kettle",
    "Riverside Brasserie", "Mahal of Cambridge", "The Rice Boat", "Caffe Uno",
    "The Oak Bistro", "Pipasha", "Saffron Brasserie", "The Gardenia",
    "Cotto", "The Varsity", "Anatolia", "Bloomsbury Kitchen", "The Nirala",
    "Curry Prince", "Dojo Noodle Bar", "The Gandhi", "Graffiti", "Hakka",
    "Kymmoy", "La Margherita", "Meghna", "The Missing Sock", "Nandos City",
    "Panahar", "Rajmahal", "The Slug and Lettuce", "Stazione", "Taj Tandoori",
    "Ugly Duckling", "The Vaults", "Wagamama Centre", "Yippee Noodle Bar",
    "Zizzi Cambridge", "The Almond Tree", "Bedouin", "The Cow Pizza Kitchen",
    "Darrys Cookhouse", "Efes Grill", "Fitzbillies", "The Galleria",
    "Hotel du Vin Bistro", "Ivory Lounge", "Jinling Noodle House", "Kohinoor",
    "Little Seoul", "The Lucky Star", "Mai Thai", "Nine Wells Kitchen",
    "The Olive Grove", "Prezzo Centre", "Quinns Quarter", "Restaurant Alimentum",
    "Sesame Pavilion", "Thanh Binh", "The Unicorn", "Venezia Trattoria",
    "Willow Pantry", "Xing Fu", "Yard of Ale", "Zouk Lounge", "The Avery",
    "Brook Tavern", "Cinnamon Spice", "The Dovecote", "Ember and Ash",
    "Fig and Thistle", "The Granary", "Harvest Moon Diner", "Isola Bella",
    "Juniper Table", "The Kingfisher", "Lantern Court", "Marigold Kitchen",
    "The Navigator", "Opal Basin", "Pearl of Siam", "The Quill", "Rustic Root",
    "Sage and Stone", "The Tamarind", "Umber Grill", "Verano Cocina",
    "The Wheatsheaf", "Xanthe Taverna", "Yellow Door Cafe", "Zephyr Rooftop",
    "Alimento Fresco", "The Bramble", "Cardamom House", "Driftwood Catch",
    "Elder and Vine", "Farrier Arms", "The Glasshouse", "Hearth and Barrel",
    "Indigo Palm", "Jade Terrace", "The Keepers Rest", "Lumen Cantina",
    "Moorhen Kitchen", "The Nutmeg Tree", "Orchard Supper Club", "Pembroke Pantry",
    "Quartermile Grill", "The Roan Horse", "Samphire Shack", "Tidewater Oyster Bar",
]

_AREAS = ["north", "south", "east", "west", "centre"]
_PRICES = ["cheap", "moderately priced", "expensive"]
_DAYS = ["Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"]


def _aspect(id_, domains, keywords, request, pos, neg, neu, oblique_pos, oblique_neg, unseen=False):
    return {
        "id": id_, "domains": domains, "keywords": keywords, "request": request,
        "pos": pos, "neg": neg, "neu": neu,
        "oblique_pos": oblique_pos, "oblique_neg": oblique_neg, "unseen": unseen,
    }


ASPECTS = [
    _aspect(
        "wifi", ("hotel",), ("wifi", "internet", "connection"),
        ("Is the {kw} reliable at {ref}?",
         "Does {ref} have good {kw} for working remotely?",
         "How is the {kw} there, is it fast enough?",
         "Do guests find the {kw} dependable?",
         "I need to take video calls, is their {kw} stable?"),
        ("The {kw} was fast and reliable for our whole stay.",
         "Their {kw} worked flawlessly in every corner of the building.",
         "I streamed films every evening and the {kw} never dropped once.",
         "Excellent {kw}, even video meetings ran without a hitch."),
        ("The {kw} kept dropping every few minutes.",
         "Their {kw} was painfully slow in the evenings.",
         "I could barely load my email on the {kw} they provide.",
         "The {kw} signal barely reached our room."),
        ("The {kw} was okay for browsing, nothing more.",),
        ("Streaming and uploads worked without a hitch the whole week.",
         "I tethered my laptop once and never needed to again."),
        ("I had to use my phone data for the entire stay.",
         "Forget about getting any work done online there."),
    ),
    _aspect(
        "water_pressure", ("hotel",), ("water pressure", "shower", "plumbing"),
        ("Does {ref} have strong {kw} in the bathroom?",
         "Is the {kw} any good there?",
         "How is the {kw}, can you actually rinse off quickly?",
         "Were guests happy with the {kw}?"),
        ("The {kw} was strong and the hot water came instantly.",
         "Great {kw}, honestly the best rinse I have had while travelling.",
         "The {kw} felt like a proper spa jet."),
        ("The {kw} was so weak it took ages to rinse off.",
         "Their {kw} is a disappointing trickle at best.",
         "The {kw} was much to be desired and the drain was clogged too.",
         "Taking a morning rinse was frustrating because the {kw} is pitiful."),
        ("The {kw} was acceptable, about what you would expect.",),
        ("Hot water arrived fast and rinsing off took no time at all.",),
        ("Washing my hair took twenty minutes because of the flow.",
         "Mornings were a battle with the bathroom fittings."),
    ),
    _aspect(
        "bed_comfort", ("hotel",), ("bed", "mattress", "pillows"),
        ("Are the {kw}s comfortable at {ref}?",
         "Is the {kw} comfortable there? I am a light sleeper.",
         "How comfy is the {kw}, any complaints from guests?",
         "Did people sleep well on the {kw} there?"),
        ("The {kw} was wonderfully soft and we slept like logs.",
         "Their {kw} is plush without being saggy, really comfortable.",
         "I slept well every single night thanks to the {kw}."),
        ("The {kw} was lumpy and squeaky all night.",
         "My back ached every morning because the {kw} is rock hard.",
         "The {kw} sagged in the middle and creaked with every turn."),
        ("The {kw} was fine, neither memorable nor terrible.",),
        ("We both slept extremely well every night we were there.",),
        ("I woke up stiff and sore every single morning.",),
    ),
    _aspect(
        "room_size", ("hotel",), ("room", "suite"),
        ("Are the {kw}s spacious at {ref}?",
         "Is the {kw} big enough for a family there?",
         "How large are the {kw}s, do they feel cramped?",
         "I prefer a big {kw}, do you know how roomy they are?"),
        ("Our {kw} was bright and spacious with lots of storage.",
         "The {kw} felt huge, with space for a desk and two armchairs.",
         "Plenty of space in the {kw} for all our luggage."),
        ("The {kw} was smaller than expected and felt cramped.",
         "We could barely open the suitcase in that tiny {kw}.",
         "The {kw} is a shoebox, the photos are generous."),
        ("The {kw} was average sized for the price.",),
        ("There was space to spare even with a cot set up.",),
        ("Two people could not move around at the same time.",),
    ),
    _aspect(
        "cleanliness", ("hotel",), ("cleanliness", "housekeeping", "bathroom"),
        ("Is {ref} clean, especially the bathrooms?",
         "How is the {kw} there? I am fussy about spotless rooms.",
         "Were guests satisfied with the {kw}?",
         "Any complaints about the {kw} at {ref}?"),
        ("The {kw} was impeccable, the room was spotless every day.",
         "Everything gleamed, {kw} clearly takes pride in their work.",
         "Immaculate {kw}, not a speck of dust anywhere."),
        ("The {kw} was poor, we found hair in the tub on arrival.",
         "The room smelled musty and the {kw} never improved it.",
         "Sticky floors and stained sheets, the {kw} is appalling."),
        ("The {kw} was adequate but nothing gleamed.",),
        ("Not a smudge on any surface during our whole visit.",),
        ("We had to ask twice before anyone wiped down the surfaces.",),
    ),
    _aspect(
        "breakfast", ("hotel",), ("breakfast", "buffet", "coffee"),
        ("Is the {kw} good at {ref}?",
         "How is the {kw} there, worth getting up for?",
         "Do guests rate the {kw}?",
         "Is the morning {kw} fresh and varied?"),
        ("The {kw} was generous with fresh pastries and great coffee.",
         "A delicious {kw} spread, the eggs were cooked to order.",
         "The {kw} alone is worth the booking."),
        ("The {kw} was stale and the coffee tasted burnt.",
         "A sad little {kw} with the same three items every day.",
         "The {kw} ran out by nine and was never restocked."),
        ("The {kw} was standard fare, edible but forgettable.",),
        ("Mornings started wonderfully with warm bread and proper espresso.",),
        ("We ended up eating at the cafe down the street instead.",),
    ),
    _aspect(
        "staff", ("hotel",), ("staff", "reception", "front desk"),
        ("Are the {kw} friendly at {ref}?",
         "How helpful are the {kw} there?",
         "Did guests find the {kw} welcoming?",
         "Is the {kw} quick to sort out problems?"),
        ("The {kw} were warm, helpful and remembered our names.",
         "Every request was handled by the {kw} with a smile.",
         "The {kw} went out of their way to arrange a late checkout."),
        ("The {kw} were rude and acted like we were a nuisance.",
         "The {kw} ignored us at arrival and never apologised.",
         "Unhelpful {kw}, every question got a shrug."),
        ("The {kw} were fine, polite enough when asked.",),
        ("Someone carried our bags up without even being asked.",),
        ("We waited at the desk for ten minutes while they chatted.",),
    ),
    _aspect(
        "noise", ("hotel",), ("noise", "soundproofing", "walls"),
        ("Is {ref} quiet at night?",
         "How bad is the {kw} there? I sleep lightly.",
         "Do the rooms suffer from street {kw}?",
         "Were guests bothered by {kw} through the {kw2}?"),
        ("The room was blissfully quiet, the {kw} never reached us.",
         "Thick {kw2}, we heard nothing from the corridor all night.",
         "Peaceful nights, the {kw} from the street is well muffled."),
        ("The {kw} from the bar downstairs went on past midnight.",
         "Paper thin {kw2}, we heard every word next door.",
         "Constant traffic {kw} made sleep nearly impossible."),
        ("Some {kw} in the evening but it settled by eleven.",),
        ("We slept with the window open and heard nothing at all.",),
        ("Earplugs were the only way to get any rest.",),
    ),
    _aspect(
        "view", ("hotel",), ("view", "balcony", "window"),
        ("Does {ref} have nice {kw}s from the rooms?",
         "Is the {kw} worth paying extra for there?",
         "How is the {kw} from the upper floors?",
         "Do the rooms with a {kw} get good light?"),
        ("The {kw} over the river was absolutely stunning at sunset.",
         "We had a gorgeous {kw} of the old town rooftops.",
         "Waking up to that {kw} made the whole trip."),
        ("Our {kw} was a brick wall and a row of bins.",
         "The promised {kw} is a car park, do not pay extra.",
         "The {kw} faces a loud construction site."),
        ("The {kw} was pleasant enough, mostly rooftops.",),
        ("Sunrise from the top floor was worth the early alarm.",),
        ("Keep the curtains closed, trust me.",),
        unseen=True,
    ),
    _aspect(
        "parking", ("hotel",), ("parking", "garage"),
        ("Is {kw} easy at {ref}?",
         "How is the {kw} situation there?",
         "Do guests struggle to find {kw} nearby?",
         "Is the {kw} secure and close to the entrance?"),
        ("The {kw} was free, secure and right by the door.",
         "Plenty of {kw} spaces even on a busy weekend.",
         "Easy {kw} with a wide, well lit garage."),
        ("The {kw} is a nightmare, we circled for half an hour.",
         "Tiny {kw} spaces and a steep extra fee.",
         "The {kw} lot was full every single evening."),
        ("Street {kw} only, but we always found a spot eventually.",),
        ("We never worried about the car once during the stay.",),
        ("We gave up and used the expensive lot two streets over.",),
    ),
    _aspect(
        "checkin", ("hotel",), ("check in", "checkin", "reception"),
        ("Is {kw} quick at {ref}?",
         "How smooth is the {kw} process there?",
         "Did guests report long waits at {kw}?",
         "Can you do an early {kw} without hassle?"),
        ("The {kw} took two minutes and they upgraded us for free.",
         "Smooth {kw}, keys in hand before our bags hit the floor.",
         "Friendly and fast {kw}, even at midnight."),
        ("The {kw} queue snaked through the lobby for forty minutes.",
         "Our room was not ready and the {kw} staff just shrugged.",
         "A chaotic {kw}, they lost our booking twice."),
        ("The {kw} was routine, a short wait at busy times.",),
        ("We were in the room minutes after stepping inside.",),
        ("We sat in the lobby with our bags for over an hour.",),
    ),
    _aspect(
        "heating", ("hotel",), ("heating", "air conditioning", "temperature"),
        ("Does the {kw} work well at {ref}?",
         "Is the {kw} adjustable in the rooms there?",
         "Were guests comfortable with the room {kw}?",
         "Any complaints about the {kw} in winter?"),
        ("The {kw} kept the room perfectly cozy all weekend.",
         "Responsive {kw} with a proper thermostat in the room.",
         "Warm radiators and no cold drafts anywhere."),
        ("The {kw} rattled all night and barely warmed the room.",
         "The {kw} was stuck on arctic, we slept in our coats.",
         "Freezing bathroom, the {kw} does not reach it."),
        ("The {kw} was adequate once we figured out the dial.",),
        ("The room stayed comfortable despite the cold snap outside.",),
        ("We asked for extra blankets two nights running.",),
        unseen=True,
    ),
    _aspect(
        "hotel_value", ("hotel",), ("value", "price", "rates"),
        ("Is {ref} good {kw} for money?",
         "Are the {kw}s fair for what you get there?",
         "Do guests think the {kw} justifies the quality?",
         "Is it overpriced, or decent {kw} overall?"),
        ("Excellent {kw}, you get far more than you pay for.",
         "Fair {kw} and no sneaky extras on the bill.",
         "For these {kw}s the quality is a steal."),
        ("Poor {kw}, the photos oversell every corner of it.",
         "Overpriced for what is essentially a tired budget stay.",
         "The {kw} stings once you see the state of the room."),
        ("Reasonable {kw}, about right for the area.",),
        ("We extended our stay because it felt like a bargain.",),
        ("You are paying for the postcode, not the experience.",),
    ),
    _aspect(
        "luggage", ("hotel",), ("luggage storage", "storage", "lift"),
        ("Does {ref} offer {kw} after checkout?",
         "Is there decent {kw} there for early arrivals?",
         "How do they handle {kw}, any issues hauling bags upstairs?",
         "Is the {kw} situation workable with heavy bags?"),
        ("They stored our bags all day at no charge, great {kw}.",
         "Easy {kw} and a porter insisted on helping with the cases.",
         "The {kw} room is secure and staffed around the clock."),
        ("There is no {kw} service or anything like that at all.",
         "No {kw} and three flights of stairs, plan accordingly.",
         "They piled our cases behind the desk unattended, so much for {kw}."),
        ("Basic {kw}, a locked cupboard behind reception.",),
        ("Dropping bags before check in was painless.",),
        ("We dragged the suitcases around town until three.",),
    ),
    _aspect(
        "food_quality", ("restaurant",), ("food", "dishes", "menu"),
        ("Is the {kw} good at {ref}?",
         "How is the {kw} there, actually tasty?",
         "Do diners rate the {kw} highly?",
         "Is the {kw} fresh and well prepared?"),
        ("The {kw} was outstanding, every dish sang with flavour.",
         "Delicious {kw}, the kitchen clearly cares about sourcing.",
         "The {kw} tasted fresh, seasonal and perfectly cooked."),
        ("The {kw} was bland and arrived lukewarm.",
         "Most of the {kw} tasted reheated and tired.",
         "The {kw} was greasy and heavy, a real letdown."),
        ("The {kw} was decent without being memorable.",),
        ("Every plate went back to the kitchen scraped clean.",),
        ("We pushed most of it around the plate and left hungry.",),
    ),
    _aspect(
        "portion_size", ("restaurant",), ("portions", "portion", "servings"),
        ("Are the {kw} generous at {ref}?",
         "How big are the {kw} there?",
         "Do the {kw} justify the prices?",
         "Will the {kw} fill you up after a long day?"),
        ("The {kw} are huge, we took half of it home.",
         "Generous {kw}, one starter fed the two of us.",
         "Hearty {kw} that actually match the pictures."),
        ("The {kw} are tiny for the money.",
         "Blink and you miss the {kw}, we ordered twice.",
         "Stingy {kw}, the plate was mostly garnish."),
        ("The {kw} are standard, enough but not generous.",),
        ("Nobody at our table had room for dessert.",),
        ("We stopped for chips on the way home, says it all.",),
    ),
    _aspect(
        "service_speed", ("restaurant",), ("service", "kitchen", "wait time"),
        ("Is the {kw} fast at {ref}?",
         "How quick is the {kw} there on a busy night?",
         "Did diners complain about slow {kw}?",
         "Is the {kw} brisk enough for a pre show dinner?"),
        ("The {kw} was brisk, mains landed within fifteen minutes.",
         "Quick and attentive {kw} even with a full room.",
         "The {kw} kept pace without ever rushing us."),
        ("The {kw} was glacial, we waited an hour for starters.",
         "Painfully slow {kw}, our mains arrived cold and late.",
         "The {kw} forgot our order entirely."),
        ("The {kw} was unhurried but steady.",),
        ("We were in and out in under an hour without feeling rushed.",),
        ("We nearly missed our train waiting for the bill.",),
    ),
    _aspect(
        "staff_friendliness", ("restaurant",), ("staff", "waiter", "server"),
        ("Are the {kw} friendly at {ref}?",
         "How welcoming are the {kw} there?",
         "Do the {kw} make you feel looked after?",
         "Any rudeness from the {kw} reported?"),
        ("The {kw} were charming and full of good recommendations.",
         "Warm, attentive {kw} who checked in just enough.",
         "The {kw} treated our kids wonderfully."),
        ("The {kw} were curt and made us feel like a burden.",
         "Our {kw} sighed every time we asked for anything.",
         "Dismissive {kw}, we had to wave for ten minutes to order."),
        ("The {kw} were efficient if a little distant.",),
        ("They remembered us from a visit months earlier.",),
        ("Not one smile the entire evening.",),
    ),
    _aspect(
        "atmosphere", ("restaurant",), ("atmosphere", "ambience", "decor"),
        ("Does {ref} have a good {kw}?",
         "How is the {kw} there, lively or flat?",
         "Is the {kw} right for a date night?",
         "Do diners enjoy the {kw} and styling?"),
        ("The {kw} was so fun, warm lighting and a gentle buzz.",
         "A lovely {kw}, candles, brick walls and easy jazz.",
         "The {kw} feels special without being stuffy."),
        ("The {kw} was flat, bright lights and echoing silence.",
         "The {kw} felt like a canteen at closing time.",
         "Grim {kw}, sticky tables and a flickering bulb."),
        ("The {kw} is pleasant if unremarkable.",),
        ("We lingered for an extra hour just soaking it in.",),
        ("We ate quickly just to get out of there.",),
    ),
    _aspect(
        "noise_level", ("restaurant",), ("noise", "music", "acoustics"),
        ("Is {ref} quiet enough for conversation?",
         "How loud is the {kw} there in the evening?",
         "Can you actually talk over the {kw2}?",
         "Is the {kw} level bearable at peak times?"),
        ("The {kw} level was perfect, we chatted without shouting.",
         "Soft background {kw2} and conversation flowed easily.",
         "Calm and quiet even on a Friday night."),
        ("The {kw} was deafening, we gave up talking.",
         "Blaring {kw2} drowned out the waiter twice.",
         "The {kw} bounces off every wall, bring earplugs."),
        ("A steady hum of {kw}, about normal for the size.",),
        ("We heard every word across the table all night.",),
        ("My ears were ringing on the walk home.",),
    ),
    _aspect(
        "dessert", ("restaurant",), ("dessert", "desserts", "cake"),
        ("Are the {kw}s worth saving room for at {ref}?",
         "How are the {kw}s there?",
         "Do diners rave about the {kw} menu?",
         "Is the {kw} selection homemade?"),
        ("The {kw} was divine, the sticky toffee is legendary.",
         "Gorgeous {kw}s, clearly made in house that morning.",
         "Save room, the {kw} trolley alone deserves a visit."),
        ("The {kw} tasted straight from a supermarket freezer.",
         "A dry, joyless {kw} that nobody finished.",
         "The {kw} list is three tired options, all stale."),
        ("The {kw} was fine, a safe crowd pleaser.",),
        ("We ordered a second slice to share, no regrets.",),
        ("Skip the final course and grab ice cream elsewhere.",),
        unseen=True,
    ),
    _aspect(
        "drinks", ("restaurant",), ("drinks", "wine", "cocktails"),
        ("Is the {kw} list good at {ref}?",
         "How are the {kw} there, anything interesting?",
         "Do they do decent {kw} before dinner?",
         "Is the {kw} selection fairly priced?"),
        ("The {kw} list is superb with smart picks by the glass.",
         "Creative {kw} and a sommelier who knows her stuff.",
         "Excellent {kw}, the negroni was the best I have had."),
        ("The {kw} were watery and overpriced.",
         "A tired {kw} list with nothing under twenty quid.",
         "My {kw} arrived warm and flat."),
        ("The {kw} selection is serviceable, a few safe labels.",),
        ("We stayed for one more round purely on merit.",),
        ("Stick to tap water, honestly.",),
        unseen=True,
    ),
    _aspect(
        "seating", ("restaurant",), ("seating", "tables", "booths"),
        ("Is the {kw} comfortable at {ref}?",
         "How cramped is the {kw} there?",
         "Can you get a decent {kw2} without booking weeks out?",
         "Do the {kw} arrangements work for a group?"),
        ("The {kw} is roomy with deep, comfortable booths.",
         "Well spaced {kw}, no elbows in your neighbour's soup.",
         "Comfortable {kw} and our group of eight fit easily."),
        ("The {kw} is so cramped we shared elbows with strangers.",
         "Hard, wobbly {kw2} and barely room to stand up.",
         "The {kw} squeezes too many tables into the room."),
        ("The {kw} is tight at peak hours but fine early.",),
        ("We spread out maps and plates with room to spare.",),
        ("I ate with my coat on because there was nowhere to hang it.",),
        unseen=True,
    ),
    _aspect(
        "rest_value", ("restaurant",), ("value", "prices", "bill"),
        ("Is {ref} good {kw} for money?",
         "Are the {kw} reasonable there?",
         "Does the {kw2} sting at the end?",
         "Is it decent {kw} for a family dinner?"),
        ("Brilliant {kw}, generous cooking at honest {kw2}s.",
         "Fair {kw2}s and no service charge surprises.",
         "Great {kw}, we ate like royalty for a modest {kw2}."),
        ("Poor {kw}, small plates at big city {kw2}s.",
         "The {kw2} stung for what amounted to bar snacks.",
         "Overpriced across the board, the {kw} is not there."),
        ("Middle of the road {kw}, you get what you pay for.",),
        ("We booked again before we had even left the table.",),
        ("Check the menu {kw2}s twice before you sit down.",),
    ),
    _aspect(
        "rest_cleanliness", ("restaurant",), ("cleanliness", "restroom", "kitchen"),
        ("Is {ref} clean, including the restrooms?",
         "How is the {kw} there? Spotless or sticky?",
         "Were diners happy with the {kw}?",
         "Any hygiene complaints about the {kw2}?"),
        ("Everything was spotless, the open {kw2} gleamed.",
         "Immaculate {kw}, even late on a Saturday.",
         "The {kw} standards are clearly drilled into the team."),
        ("Sticky menus and a grimy {kw2}, the {kw} needs work.",
         "The restroom was filthy by eight, the {kw} is an afterthought.",
         "Crumbs from the previous table greeted us, poor {kw}."),
        ("The {kw} was acceptable, the odd smear here and there.",),
        ("You could eat off any surface in the place.",),
        ("I washed my hands and wished I had not looked around.",),
    ),
    _aspect(
        "wait_time", ("restaurant",), ("wait", "queue", "booking"),
        ("How long is the {kw} for a table at {ref}?",
         "Is the {kw} manageable without a {kw2}?",
         "Do walk ins face a long {kw} there?",
         "Were diners stuck in a {kw} at the door?"),
        ("No {kw} at all, we were seated the moment we arrived.",
         "The {kw} moved fast and the host kept us posted.",
         "Even without a {kw2} we sat within ten minutes."),
        ("The {kw} was an hour despite half the tables sitting empty.",
         "A chaotic {kw}, people who came later were seated first.",
         "They lost our {kw2} and sent us to the back of the {kw}."),
        ("A short {kw} on weekends, painless midweek.",),
        ("We strolled straight to a window table at seven on a Friday.",),
        ("Bring a coat, you will be standing outside a while.",),
        unseen=True,
    ),
    _aspect(
        "spice_level", ("restaurant",), ("spice", "seasoning", "heat"),
        ("Is the {kw} level authentic at {ref}?",
         "How bold is the {kw} there?",
         "Do they get the {kw} right or tone it down?",
         "Can you ask for proper {kw2} and actually get it?"),
        ("The {kw} is bold and beautifully balanced.",
         "Proper {kw}, they trust you with the real thing.",
         "Layered {kw2} that builds without burning."),
        ("The {kw} was timid, everything tasted of nothing.",
         "They dumbed the {kw} down to tourist levels.",
         "One dish was scorching, the next bland, the {kw2} is random."),
        ("The {kw} sits safely in the middle of the road.",),
        ("My nose ran happily through all three courses.",),
        ("The chilli flakes on the table did all the work.",),
    ),
]

FILLERS = [
    "We arrived at 3pm after a long drive.",
    "We stayed two nights in early March.",
    "My partner and I visited for an anniversary trip.",
    "I was in town for a conference that week.",
    "We booked through the usual website a month ahead.",
    "It was our third time in the city but first time here.",
    "The weather that weekend was grey and drizzly.",
    "We had the kids with us, aged six and nine.",
    "Our train got in late so we arrived after dark.",
    "This was a last minute booking on a bank holiday.",
]

_OPENINGS_HOTEL = [
    "I am looking for a place to stay in the {area}.",
    "Can you find me a {price} hotel in the {area}?",
    "I need a hotel with free parking in the {area} part of town.",
    "Are there any {price} guesthouses in the {area}?",
    "I want to book somewhere to stay near the {area} side.",
]
_OPENINGS_REST = [
    "I am looking for a place to eat in the {area}.",
    "Can you find me a {price} restaurant in the {area}?",
    "I would like to book a table somewhere {price} in the {area}.",
    "Any good places for dinner in the {area} part of town?",
    "We need a restaurant in the {area} for tonight.",
]
_RECOMMEND_ONE = [
    "How about {name}? It is a {price} option in the {area}.",
    "I would suggest {name}, it is {price} and in the {area}.",
    "{name} matches what you are after. Shall I book it?",
    "There is {name} in the {area}, would that work?",
]
_RECOMMEND_TWO = [
    "I found two options: {name} and {name2}. Both are in the {area}.",
    "You could try {name} or {name2}, both match your criteria.",
    "Two places come up, {name} and {name2}. Any preference?",
]
_MID_USER = [
    "That sounds good. Can you book it for {n} people on {day}?",
    "What is the postcode for it?",
    "Could you book {n} nights from {day}?",
    "Is it available this {day}?",
    "Great, I will need it for {n} guests.",
    "Can I get the phone number as well?",
]
_MID_USER_PICK = [
    "The first one sounds good, let us go with that.",
    "Let us try the first option you mentioned.",
    "The first one will do nicely, thanks.",
]
_MID_SYSTEM = [
    "Done! Your reference number is {code}.",
    "Booked for {day}. The reference is {code}.",
    "The postcode is CB{pc}, and the phone number is 01223{phone}.",
    "Yes, it is available then. Shall I reserve it?",
    "All set for {n} guests. Anything else?",
    "Certainly, it is 01223{phone}.",
]
_DISTRACTOR_USER = [
    "A colleague recommended {name2} once, but let us stick with this booking.",
    "My friend stayed at {name2} last year, though I trust your pick.",
    "I walked past {name2} before, anyway this one works for me.",
]

_NEG_FINALS = [
    "Book it for {n} nights starting {day}, please.",
    "Can you book a table for {n} at 19:15 on {day}?",
    "What is the exact address?",
    "Can I get the reference number again?",
    "I also need a taxi from the station at {hour}:00.",
    "What time is checkout?",
    "Do they have free parking on site?",
    "Does it have wifi included in the rate?",
    "How many stars is it rated?",
    "That is everything, thank you for the help!",
    "Actually, make the booking for {day} instead.",
    "Is it in the {area} part of town?",
    "Please cancel my earlier reservation first.",
    "Can you confirm the postcode one more time?",
    # factual-availability phrasings that brush against subjective vocabulary
    "Great, go ahead and book it for {day}.",
    "Good, that is all I needed today.",
    "Do they have wifi in the rooms?",
    "Is there a restaurant on site?",
    "Does the room have air conditioning?",
    "Do they serve breakfast before 7?",
]

_REQ_GENERIC = [
    "Before I commit, is the {kw} any good?",
    "One more thing, how do people rate the {kw}?",
    "What do the reviews say about the {kw}?",
]

_REF_OPEN_ALLPOS = [
    "Yes, guests consistently praise the {kw} there.",
    "Good news, every review of the {kw} is glowing.",
    "Reviewers are unanimous that the {kw} is excellent.",
    "All the feedback on the {kw} is positive.",
]
_REF_OPEN_ALLNEG = [
    "No, guests consistently complain about the {kw}, unfortunately.",
    "I am afraid every review of the {kw} is negative.",
    "Sadly reviewers are unanimous that the {kw} disappoints.",
    "The feedback on the {kw} is uniformly poor, I am sorry to say.",
]
_REF_MIXED_POS = [
    "{maj} of {m} reviewers liked the {kw}, though {minr} did not.",
    "Opinions lean positive, {maj} of {m} praised the {kw} while {minr} complained.",
    "The majority praise the {kw}, but {minr} of the {m} reviews are critical.",
]
_REF_MIXED_NEG = [
    "{maj} of {m} reviewers had problems with the {kw}, though {minr} liked it.",
    "Opinions lean negative, {maj} of {m} knocked the {kw} while {minr} were satisfied.",
    "Most reviews criticise the {kw}, but {minr} of the {m} were positive.",
]
_REF_SPLIT = [
    "It is a coin toss, reviews of the {kw} are split evenly {maj} to {minr}.",
    "Opinions on the {kw} are divided right down the middle, {maj} for and {minr} against.",
]
_REF_NEU_TAIL = [
    " Another {neu} found it merely ok.",
    " The remaining {neu} thought it was just average.",
]
_REF_QUOTE = [
    ' One wrote "{frag}".',
    ' One review says "{frag}".',
]
_REF_CONT = [
    " Will that be okay?",
    " Still want me to book it?",
    " Shall I look elsewhere?",
    "",
    "",
]
_REF_TWO_ENTITY = [
    "Comparing the two on {kw}: {clause_a}, while {clause_b}.",
    "For the {kw}, {clause_a}; over at the other one, {clause_b}.",
]


@dataclass
class _SentenceMeta:
    aspect: str | None
    polarity: str  # positive | negative | neutral | none


class _EntityRecord:
    def __init__(self, domain: str, entity_id: str, name: str):
        self.domain = domain
        self.entity_id = entity_id
        self.name = name
        self.profile: dict[str, float] = {}
        self.reviews: list[list[tuple[str, _SentenceMeta]]] = []

    def aspect_refs(self, aspect_id: str) -> list[tuple[str, str, str, str]]:
        refs = []
        for rid, review in enumerate(self.reviews):
            for sid, (_, meta) in enumerate(review):
                if meta.aspect == aspect_id:
                    refs.append((self.domain, self.entity_id, str(rid), str(sid)))
        return refs

    def sentence(self, rid: str, sid: str) -> tuple[str, _SentenceMeta]:
        return self.reviews[int(rid)][int(sid)]


def _domain_aspects(domain: str, include_unseen: bool) -> list[dict]:
    return [a for a in ASPECTS if domain in a["domains"] and (include_unseen or not a["unseen"])]


def _fill(template: str, rng: random.Random, aspect: dict | None = None, **extra) -> str:
    slots = dict(extra)
    if aspect is not None:
        primary = aspect["keywords"][0]
        secondary = aspect["keywords"][1] if len(aspect["keywords"]) > 1 else primary
        kw = primary if rng.random() >= SECONDARY_KEYWORD_RATE else secondary
        slots.setdefault("kw", kw)
        slots.setdefault("kw2", secondary if slots["kw"] == primary else primary)
        slots.setdefault("Kw", slots["kw"].capitalize())
    slots.setdefault("area", rng.choice(_AREAS))
    slots.setdefault("price", rng.choice(_PRICES))
    slots.setdefault("day", rng.choice(_DAYS))
    slots.setdefault("n", rng.randint(1, 6))
    slots.setdefault("hour", rng.randint(8, 21))
    slots.setdefault("code", "".join(rng.choice("ABCDEFGHJKLMNPQRSTUVWXYZ23456789") for _ in range(8)))
    slots.setdefault("pc", rng.randint(1, 5))
    slots.setdefault("phone", rng.randint(100000, 999999))
    return template.format(**slots)


def _build_entities(rng: random.Random) -> list[_EntityRecord]:
    entities = []
    for i, name in enumerate(HOTEL_NAMES):
        entities.append(_EntityRecord("hotel", str(i), name))
    for i, name in enumerate(RESTAURANT_NAMES):
        entities.append(_EntityRecord("restaurant", str(i), name))
    # quality profile per (entity, aspect): probability a review sentence is positive
    levels = [0.92, 0.72, 0.5, 0.28, 0.08]
    weights = [0.30, 0.22, 0.16, 0.20, 0.12]
    for ent in entities:
        for aspect in _domain_aspects(ent.domain, include_unseen=True):
            ent.profile[aspect["id"]] = rng.choices(levels, weights)[0]
    # the Cityroomz water-pressure fixture: uniformly negative reviews
    entities[0].profile["water_pressure"] = 0.0
    return entities


_SENTENCE_TAILS = [
    "to be honest", "if you ask me", "for what it is worth", "all things considered",
    "during our whole stay", "on both of our visits", "from the very first day",
    "which surprised us a little", "and my partner agreed completely",
    "much like the other reviews say", "even at the weekend", "no two ways about it",
]


def _sentence_for(aspect: dict, polarity: str, rng: random.Random) -> str:
    if polarity == "neutral":
        text = _fill(rng.choice(aspect["neu"]), rng, aspect)
    else:
        keyworded = rng.random() < KEYWORD_SENTENCE_RATE
        bank = aspect["pos" if polarity == "positive" else "neg"] if keyworded \
            else aspect["oblique_pos" if polarity == "positive" else "oblique_neg"]
        text = _fill(rng.choice(bank), rng, aspect)
    # pad toward the corpus's snippet length profile
    if rng.random() < 0.72:
        text = text.rstrip(".") + ", " + rng.choice(_SENTENCE_TAILS) + "."
    return text


def _build_reviews(entities: list[_EntityRecord], rng: random.Random) -> None:
    for ent in entities:
        aspects = _domain_aspects(ent.domain, include_unseen=True)
        for _ in range(REVIEWS_PER_ENTITY):
            n_aspects = rng.randint(3, 6)
            chosen = rng.sample(aspects, min(n_aspects, len(aspects)))
            review: list[tuple[str, _SentenceMeta]] = []
            for aspect in chosen:
                p_pos = ent.profile[aspect["id"]]
                if rng.random() < NEUTRAL_RATE:
                    polarity = "neutral"
                else:
                    polarity = "positive" if rng.random() < p_pos else "negative"
                review.append((
                    _sentence_for(aspect, polarity, rng),
                    _SentenceMeta(aspect["id"], polarity),
                ))
            if rng.random() < FILLER_RATE:
                review.insert(0, (rng.choice(FILLERS), _SentenceMeta(None, "none")))
            ent.reviews.append(review)
    # guarantee the water-pressure fixture has enough snippets
    city = entities[0]
    wp = next(a for a in ASPECTS if a["id"] == "water_pressure")
    have = len(city.aspect_refs("water_pressure"))
    for i in range(max(0, 5 - have)):
        city.reviews[i].append((
            _sentence_for(wp, "negative", rng),
            _SentenceMeta("water_pressure", "negative"),
        ))
    # pad with fillers to hit the exact corpus sentence count
    total = sum(len(rev) for ent in entities for rev in ent.reviews)
    if total > TOTAL_SENTENCES:
        raise AssertionError(f"generated {total} sentences, above the {TOTAL_SENTENCES} target; lower rates")
    i = 0
    all_reviews = [rev for ent in entities for rev in ent.reviews]
    while total < TOTAL_SENTENCES:
        rev = all_reviews[i % len(all_reviews)]
        rev.append((rng.choice(FILLERS), _SentenceMeta(None, "none")))
        total += 1
        i += 7  # spread padding across entities
    assert total == TOTAL_SENTENCES


def _typo(name_core: str, rng: random.Random, variants) -> str:
    """Misspell a name so every variant scores in [0.85, 0.95)."""
    word = name_core
    for _ in range(6):
        pos = rng.randrange(1, max(2, len(word) - 1))
        word = word[:pos] + word[pos + 1:]
        scores = [ngram_match_score(v.normalized, word.lower()) for v in variants]
        if all(s < 0.95 for s in scores):
            return word
    return word


def _entity_mention(ent: _EntityRecord, rng: random.Random) -> str:
    return ent.name if rng.random() < 0.8 else ent.name.replace("The ", "the ")


class _DialogueBuilder:
    def __init__(self, entities: list[_EntityRecord], rng: random.Random):
        self.entities = entities
        self.rng = rng
        self.by_domain = {
            "hotel": [e for e in entities if e.domain == "hotel"],
            "restaurant": [e for e in entities if e.domain == "restaurant"],
        }

    def _skeleton(self, ents: list[_EntityRecord], pattern: str) -> list[dict]:
        rng = self.rng
        domain = ents[0].domain
        openings = _OPENINGS_HOTEL if domain == "hotel" else _OPENINGS_REST
        turns = [{"speaker": "U", "text": _fill(rng.choice(openings), rng)}]
        if pattern in ("spurious_pair", "multi"):
            other = ents[1] if len(ents) > 1 else rng.choice([e for e in self.by_domain[domain] if e is not ents[0]])
            turns.append({"speaker": "S", "text": _fill(
                rng.choice(_RECOMMEND_TWO), rng,
                name=_entity_mention(ents[0], rng), name2=_entity_mention(other, rng))})
        elif pattern == "typo_miss":
            variants = name_variants(ents[0].name)
            core = max(variants, key=lambda v: len(v.normalized)).normalized
            broken = _typo(core, rng, variants)
            turns.append({"speaker": "S", "text": _fill(
                rng.choice(_RECOMMEND_ONE), rng, name=broken.title())})
        else:
            turns.append({"speaker": "S", "text": _fill(
                rng.choice(_RECOMMEND_ONE), rng, name=_entity_mention(ents[0], rng))})
        n_pairs = rng.choices([2, 3, 4, 5], [0.20, 0.50, 0.25, 0.05])[0]
        for i in range(n_pairs):
            if pattern == "spurious_pair" and i == 0:
                turns.append({"speaker": "U", "text": rng.choice(_MID_USER_PICK)})
            elif pattern == "late_distractor" and i == n_pairs - 1:
                distractor = rng.choice([e for e in self.by_domain[domain] if e is not ents[0]])
                turns.append({"speaker": "U", "text": _fill(
                    rng.choice(_DISTRACTOR_USER), rng, name2=_entity_mention(distractor, rng))})
            else:
                turns.append({"speaker": "U", "text": _fill(rng.choice(_MID_USER), rng)})
            turns.append({"speaker": "S", "text": _fill(rng.choice(_MID_SYSTEM), rng)})
        return turns

    def subjective(self, ents: list[_EntityRecord], aspect: dict, pattern: str) -> list[dict]:
        rng = self.rng
        turns = self._skeleton(ents, pattern)
        if pattern == "multi" and rng.random() < 0.4:
            text = _fill(
                "Between {a} and {b}, which has the better {kw}?", rng, aspect,
                a=ents[0].name, b=ents[1].name)
        elif pattern == "multi":
            text = _fill(rng.choice([
                "How do they compare on the {kw}?",
                "Which of the two has the better {kw}?",
                "Is the {kw} decent at both of them?",
            ]), rng, aspect)
        else:
            # the clean pattern may re-mention the entity in the request itself
            mention_ok = pattern == "clean" and rng.random() < 0.35
            ref = ents[0].name if mention_ok else rng.choice(["this one", "the place", "that place"])
            if rng.random() < 0.12:
                text = _fill(rng.choice(_REQ_GENERIC), rng, aspect)
            else:
                text = _fill(rng.choice(aspect["request"]), rng, aspect, ref=ref)
        turns.append({"speaker": "U", "text": text})
        return turns

    def negative(self, ents: list[_EntityRecord]) -> list[dict]:
        rng = self.rng
        turns = self._skeleton(ents, "clean")
        turns.append({"speaker": "U", "text": _fill(rng.choice(_NEG_FINALS), rng)})
        return turns


def _reference_response(
    gold_by_entity: list[tuple[_EntityRecord, list[tuple[str, str, str, str]]]],
    aspect: dict,
    rng: random.Random,
) -> str:
    def clause(ent: _EntityRecord, refs, standalone: bool) -> str:
        pols = [ent.sentence(r[2], r[3])[1].polarity for r in refs]
        pos = sum(1 for p in pols if p == "positive")
        neg = sum(1 for p in pols if p == "negative")
        neu = sum(1 for p in pols if p == "neutral")
        m = pos + neg + neu
        kw = aspect["keywords"][0]
        if standalone:
            if neg == 0 and pos > 0:
                text = _fill(rng.choice(_REF_OPEN_ALLPOS), rng, aspect)
            elif pos == 0 and neg > 0:
                text = _fill(rng.choice(_REF_OPEN_ALLNEG), rng, aspect)
            elif pos == neg:
                text = rng.choice(_REF_SPLIT).format(kw=kw, maj=pos, minr=neg)
            elif pos > neg:
                text = rng.choice(_REF_MIXED_POS).format(kw=kw, maj=pos, minr=neg, m=m)
            else:
                text = rng.choice(_REF_MIXED_NEG).format(kw=kw, maj=neg, minr=pos, m=m)
            if neu and rng.random() < 0.5:
                text += rng.choice(_REF_NEU_TAIL).format(neu=neu)
            return text
        if neg == 0 and pos > 0:
            return f"guests at {ent.name} love the {kw}"
        if pos == 0 and neg > 0:
            return f"guests at {ent.name} complain about it"
        return f"{ent.name} gets mixed reviews, {pos} good and {neg} bad"

    if len(gold_by_entity) == 1:
        ent, refs = gold_by_entity[0]
        text = clause(ent, refs, standalone=True)
        if rng.random() < FRAGMENT_LIFT_RATE and refs:
            src = ent.sentence(*rng.choice(refs)[2:])[0]
            words = src.rstrip(".!").split()
            if len(words) >= 4:
                start = rng.randrange(0, len(words) - 3)
                frag = " ".join(words[start:start + rng.randint(3, min(6, len(words) - start))])
                text += rng.choice(_REF_QUOTE).format(frag=frag)
    else:
        (ent_a, refs_a), (ent_b, refs_b) = gold_by_entity[:2]
        text = rng.choice(_REF_TWO_ENTITY).format(
            kw=aspect["keywords"][0],
            clause_a=clause(ent_a, refs_a, standalone=False),
            clause_b=clause(ent_b, refs_b, standalone=False),
        )
    return text + rng.choice(_REF_CONT)


def build(data_dir: str | Path, seed: int = 7, scale: float = 1.0) -> dict:
    """Materialize the surrogate release under data_dir; returns summary stats."""
    data_dir = Path(data_dir)
    data_dir.mkdir(parents=True, exist_ok=True)

    ent_rng = random.Random(f"{seed}/entities")
    entities = _build_entities(ent_rng)
    _build_reviews(entities, random.Random(f"{seed}/reviews"))

    knowledge: dict = {}
    for ent in entities:
        dom = knowledge.setdefault(ent.domain, {})
        dom[ent.entity_id] = {
            "name": ent.name,
            "reviews": {
                str(rid): {"sentences": {str(sid): s for sid, (s, _) in enumerate(review)}}
                for rid, review in enumerate(ent.reviews)
            },
        }
    (data_dir / "knowledge.json").write_text(
        json.dumps(knowledge, ensure_ascii=False, indent=1), encoding="utf-8")

    aspect_by_id = {a["id"]: a for a in ASPECTS}
    stats = {"entities": len(entities), "sentences": TOTAL_SENTENCES}
    for split in ("train", "val", "test"):
        rng = random.Random(f"{seed}/{split}")
        builder = _DialogueBuilder(entities, rng)
        n_pos = max(1, round(TARGET_TRUE[split] * scale))
        n_neg = max(1, round(NEGATIVES[split] * scale))
        include_unseen = split != "train"
        records = []

        for _ in range(n_pos):
            domain = "hotel" if rng.random() < 0.4 else "restaurant"
            aspects = _domain_aspects(domain, include_unseen)
            multi = rng.random() < MULTI_ENTITY_RATE[split]
            for _attempt in range(200):
                aspect = rng.choice(aspects)
                if include_unseen and not aspect["unseen"] and rng.random() < 0.25:
                    unseen_pool = [a for a in aspects if a["unseen"]]
                    if unseen_pool:
                        aspect = rng.choice(unseen_pool)
                pool = builder.by_domain[domain]
                ents = rng.sample(pool, 2 if multi else 1)
                gold_by_entity = [(e, e.aspect_refs(aspect["id"])) for e in ents]
                if all(refs for _, refs in gold_by_entity):
                    break
            else:
                raise AssertionError("could not find covered (entity, aspect) pair")
            if multi:
                pattern = "multi"
            else:
                roll = rng.random()
                if roll < SPURIOUS_PAIR_RATE:
                    pattern = "spurious_pair"
                elif roll < SPURIOUS_PAIR_RATE + TYPO_MISS_RATE:
                    pattern = "typo_miss"
                elif roll < SPURIOUS_PAIR_RATE + TYPO_MISS_RATE + LATE_DISTRACTOR_RATE:
                    pattern = "late_distractor"
                else:
                    pattern = "clean"
            log = builder.subjective(ents, aspect, pattern)
            gold = [
                {"domain": d, "entity_id": e, "review_id": r, "sent_id": s}
                for _, refs in gold_by_entity for (d, e, r, s) in refs
            ]
            label = {
                "target": True,
                "knowledge": gold,
                "response": _reference_response(gold_by_entity, aspect, rng),
            }
            records.append((log, label))

        for _ in range(n_neg):
            domain = "hotel" if rng.random() < 0.4 else "restaurant"
            ents = [rng.choice(builder.by_domain[domain])]
            records.append((builder.negative(ents), {"target": False}))

        rng.shuffle(records)
        split_dir = data_dir / split
        split_dir.mkdir(exist_ok=True)
        (split_dir / "logs.json").write_text(
            json.dumps([log for log, _ in records], ensure_ascii=False, indent=1), encoding="utf-8")
        (split_dir / "labels.json").write_text(
            json.dumps([label for _, label in records], ensure_ascii=False, indent=1), encoding="utf-8")
        stats[split] = {"target": n_pos, "negatives": n_neg}
        logger.info("synth split %s: %d target + %d negatives", split, n_pos, n_neg)

    (data_dir / "meta.json").write_text(json.dumps({
        "generator": GENERATOR_VERSION,
        "seed": seed,
        "scale": scale,
    }, indent=1), encoding="utf-8")
    return stats
