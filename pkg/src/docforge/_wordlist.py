"""Built-in word list used when no corpus is supplied."""

FALLBACK_WORDS = (
    'the', 'of', 'and', 'to', 'in', 'is', 'was', 'for', 'on', 'as',
    'with', 'by', 'he', 'at', 'from', 'his', 'an', 'were', 'are', 'which',
    'this', 'be', 'or', 'had', 'not', 'first', 'one', 'their', 'its', 'new',
    'after', 'but', 'who', 'they', 'have', 'her', 'she', 'two', 'been', 'other',
    'when', 'there', 'all', 'during', 'into', 'school', 'time', 'may', 'years', 'more',
    'most', 'only', 'over', 'city', 'some', 'world', 'would', 'where', 'later', 'up',
    'such', 'used', 'many', 'can', 'state', 'about', 'national', 'out', 'known', 'university',
    'united', 'then', 'made', 'no', 'part', 'under', 'while', 'year', 'team', 'three',
    'between', 'both', 'age', 'series', 'well', 'since', 'film', 'population', 'also', 'through',
    'season', 'being', 'government', 'around', 'north', 'south', 'east', 'west', 'house', 'music',
    'early', 'county', 'river', 'game', 'line', 'war', 'history', 'family', 'name', 'public',
    'area', 'century', 'number', 'group', 'high', 'development', 'american', 'english', 'station', 'market',
    'water', 'paper', 'design', 'office', 'report', 'order', 'policy', 'total', 'price', 'invoice',
    'date', 'amount', 'receipt', 'cash', 'change', 'tax', 'item', 'quantity', 'service', 'account',
    'payment', 'company', 'address', 'phone', 'letter', 'memo', 'email', 'form', 'note', 'table',
    'figure', 'page', 'section', 'chapter', 'summary', 'result', 'method', 'data', 'value', 'model',
    'system', 'process', 'analysis', 'review', 'study', 'board', 'member', 'meeting', 'project', 'plan',
    'budget', 'cost', 'sale', 'product', 'customer', 'store', 'branch', 'street', 'road', 'avenue',
    'building', 'floor', 'room', 'center', 'park', 'garden', 'light', 'night', 'morning', 'evening',
    'day', 'week', 'month', 'today', 'tomorrow', 'yesterday', 'green', 'blue', 'red', 'black',
    'white', 'gray', 'small', 'large', 'long', 'short', 'open', 'close', 'read', 'write',
    'print', 'sign', 'check', 'list', 'copy', 'subtotal', 'discount', 'card', 'code', 'reference',
    'visa', 'coffee', 'tea', 'bread', 'milk', 'rice', 'chicken', 'soup', 'salad', 'juice',
    'cake', 'cheese', 'apple', 'orange', 'lemon', 'sugar', 'salt',
)
