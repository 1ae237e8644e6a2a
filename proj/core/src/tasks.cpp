#include <array>

#include "sinogate/prompt.hpp"
#include "sinogate/task.hpp"

namespace sinogate {

namespace {

const std::vector<TaskDescriptor>& registry()
{
    static const std::vector<TaskDescriptor> tasks{
        {TaskCode::RW1,
         "Overall Reading Comprehension",
         {"Can understand very short, simple texts a single phrase at a time, picking up familiar words and basic "
          "phrases and rereading as required.",
          "Can understand simple forms well enough to give basic personal details (e.g., name, address, date of "
          "birth)."},
         {"Can understand short, simple texts containing the highest frequency vocabulary.",
          "Can understand short simple messages and texts containing basic high frequency everyday vocabulary "
          "relating to areas of personal relevance or interest. (A2+)",
          "Can understand short narratives about everyday things dealing with topics which are familiar to me if "
          "the text is written in simple language. (A2+)"}},
        {TaskCode::RW2,
         "Reading Correspondence",
         {"Can understand simple written messages concerning appointments (time and date), e.g. in sms phone "
          "messages, emails etc.",
          "Can understand short simple greetings and messages e.g. via SMS, on birthday cards and invitations. (A1+)",
          "Can understand simple personal information (family, age, hobbies etc.) exchanged on social networking "
          "platforms. (A1+)"},
         {"Can understand short simple personal letters giving or requesting information about everyday life or "
          "offering an invitation.",
          "Can identify different types of letters relating familiar topics (information request, orders, "
          "complaints etc.) (A2+)"}},
        {TaskCode::RW3,
         "Reading for Orientation",
         {"Can find time and price related information encountered in public places (price tags, opening hours).",
          "Can understand single words and some very short phrases frequently encountered in public places on "
          "signboards, posters and brochures (e.g. “no smoking”, “private”, ”station”, "
          "”car park”, ”no parking”, ”keep left”), or in the classroom (e.g. "
          "“book”, “very good”). (A1+)",
          "Can understand the most important menu items/options in a computer programme, such as “PRINT”, "
          "“SAVE”, “COPY”. (A1+)"},
         {"Can find specific predictable information in simple everyday material such as advertisements, "
          "timetables, menus, directories, brochures.",
          "Can skim small advertisements in newspapers, locate the heading or column I want and identify the most "
          "important pieces of information (price and size of apartments, cars, and computers).",
          "Can find specific, predictable information in simple everyday material such as advertisements, "
          "prospectuses, menus, reference lists and timetables. (A2+)",
          "Can understand everyday signs and notices in public places, such as streets, restaurants, railway "
          "stations; in workplaces, such as directions, instructions, hazard warnings. (A2+)"}},
        {TaskCode::RW4,
         "Reading for Information & Argument",
         {"Can get an idea of the content of simpler informational material and short simple descriptions, "
          "especially if there is visual support."},
         {"Can identify specific information in simpler written material he/she encounters such as letters, "
          "brochures and short newspaper articles describing events if pictorial support is provided and rereading "
          "permitted.",
          "Can identify important information in news summaries or simple newspaper articles in which numbers play "
          "an important role and which are clearly structured and illustrated. (A2+)"}},
        {TaskCode::RW5,
         "Reading Instructions",
         {"Can follow simple instructions in textbooks (listen / read / speak with classmate / note down).",
          "Can follow short, simple written directions if familiar with relevant proper names in their "
          "sino-graphemic form. (A1+)"},
         {"Can follow clear, step-by-step instructions on equipment encountered in everyday life such as simple "
          "food preparation instructions (e.g. instant noodles), public telephone, taking out cash or buying a "
          "drink from a machine mainly relying on visual support.",
          "Can understand regulations, for example safety, when expressed in simple language. (A2+)"}},
        {TaskCode::PW1,
         "Overall Written Production",
         {"Can write simple isolated phrases and sentences.",
          "Can write simple isolated phrases and sentences about some personal information (name, age, birthday, "
          "nationality, where I am, my family).",
          "Can write in short simple sentences a blog entry or a similar piece of writing introducing oneself with "
          "basic information such as family, jobs, hobbies, one’s hometown, etc. (A1+)"},
         {"Can compose a series of simple phrases and sentences connected together or linked with simple "
          "connectors like “but” and “because”.",
          "Can compose simple connected texts on a range of topics within my field of interest. (A2+)",
          "Can compose in short simple sentences a blog entry or a similar piece of writing about one's impressions "
          "of something one just bought (such as a digital camera) or of an event (such as a friend’s "
          "wedding). (A2+)"}},
        {TaskCode::PW2,
         "Creative Writing",
         {"Can write simple phrases and sentences about themselves and imaginary people, where they live and what "
          "they do, their family and their hobbies.",
          "I can briefly introduce myself in a letter with simple phrases and sentences (family, school, job, "
          "hobbies). (A1+)"},
         {"Can compose a series of simple phrases and sentences about their family, living conditions, educational "
          "background, present or most recent job.",
          "Can compose short, simple imaginary biographies and simple poems about people.",
          "Can compose about everyday aspects of his environment e.g. people, places, a job or study experience in "
          "linked sentences. (A2+)",
          "Can compose very short, basic descriptions of events, past activities and personal experiences. (A2+)",
          "Can compose a description of a real or imaginary experience (a travelogue) (A2+)"}},
        {TaskCode::IW1,
         "Overall Written Interaction",
         {"Can ask for or pass on personal details in written form.",
          "I can write a note to tell somebody where I am or where we are to meet. (A1+)"},
         {"Can compose short, simple formulaic notes relating to matters in areas of immediate need.",
          "Can compose in short simple sentences one's wishes, impressions, etc. about such topics as the menu or "
          "the taste of the food, on a form to put in a suggestion box found in, for example, a company or "
          "university cafeteria. (A2+)"}},
        {TaskCode::IW2,
         "Correspondence",
         {"Can write and answer to a short simple postcard.",
          "I can write very short and simple letters or e-mails, telling about everyday things to people I know "
          "well. (A1+)"},
         {"Can compose very simple personal letters expressing thanks and apology.",
          "Can compose a simple letter to a friend to introduce myself, my family, school and hobbies.)",
          "Can compose short letters or emails, telling about everyday things to people I know well.",
          "Can compose a simple personal letter to invite someone or to propose something. (A2+)"}},
        {TaskCode::IW3,
         "Notes, Messages & Forms",
         {"Can write numbers and dates, own name, nationality, place of birth/ residence, age, date of birth or "
          "arrival in the country etc. such as on a hotel registration form.",
          "Can ask for or pass on personal details in written form.",
          "Can write a short simple note or message (e.g., to tell somebody where I am or where to meet, to say "
          "that someone telephoned, arranging to meet someone, explaining absence). (A1+)"},
         {"Can compose short, simple notes and messages relating to matters in areas of immediate need.",
          "Can fill in a questionnaire giving an account of my educational background, my job, my interests and my "
          "specific skills.",
          "Can take a short, simple message provided he/she can ask for repetition and reformulation about familial "
          "topics. (A2+)"}},
    };
    return tasks;
}

constexpr std::array<std::string_view, 10> task_names{
    "RW1", "RW2", "RW3", "RW4", "RW5", "PW1", "PW2", "IW1", "IW2", "IW3"};

} // namespace

std::string_view to_string(TaskCode code) noexcept
{
    return task_names[static_cast<std::size_t>(code)];
}

std::optional<TaskCode> parse_task(std::string_view text) noexcept
{
    for (std::size_t i = 0; i < task_names.size(); ++i) {
        if (task_names[i] == text) return all_tasks[i];
    }
    return std::nullopt;
}

UnknownTask::UnknownTask(std::string_view text)
    : Error("unknown EBCL task '" + std::string(text) + "' (expected RW1-RW5, PW1-PW2 or IW1-IW3)")
{
}

TaskCode task_from_string(std::string_view text)
{
    if (auto code = parse_task(text)) return *code;
    throw UnknownTask(text);
}

std::string_view to_string(PromptCondition condition) noexcept
{
    return condition == PromptCondition::with_list ? "with_list" : "without_list";
}

std::optional<PromptCondition> parse_condition(std::string_view text) noexcept
{
    if (text == "with_list") return PromptCondition::with_list;
    if (text == "without_list") return PromptCondition::without_list;
    return std::nullopt;
}

PromptCondition condition_from_string(std::string_view text)
{
    if (auto c = parse_condition(text)) return *c;
    throw Error("unknown prompt condition '" + std::string(text) + "' (expected with_list or without_list)");
}

std::span<const TaskDescriptor> list_tasks()
{
    return registry();
}

const TaskDescriptor& describe(TaskCode code)
{
    return registry()[static_cast<std::size_t>(code)];
}

nlohmann::json tasks_to_json()
{
    auto out = nlohmann::json::array();
    for (const auto& t : registry()) {
        nlohmann::json a1 = nlohmann::json::array();
        nlohmann::json a2 = nlohmann::json::array();
        for (auto d : t.a1) a1.push_back(std::string(d));
        for (auto d : t.a2) a2.push_back(std::string(d));
        out.push_back({{"code", to_string(t.code)},
                       {"title", std::string(t.title)},
                       {"descriptors", {{"A1", std::move(a1)}, {"A2", std::move(a2)}}}});
    }
    return out;
}

} // namespace sinogate
