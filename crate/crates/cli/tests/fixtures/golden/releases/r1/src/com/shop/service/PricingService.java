package com.shop.service;

import com.shop.model.CustomerRecord;
import com.shop.model.Order;
import com.shop.util.Log;

public class PricingService {
    public long applyDiscount(Order order, CustomerRecord record) {
        if (order.isEmpty()) {
            return 0;
        }
        long cents = order.getTotalCents();
        if (record.loyaltyPoints > 100) {
            cents = cents * 90 / 100;
        }
        if (record.tier != null && record.tier.equals("gold")) {
            cents = cents * 95 / 100;
        }
        Log.info("discount applied");
        return cents;
    }

    public long basePrice(Order order) {
        return order.getTotalCents();
    }
}
